// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "avoco/error.hpp"
#include "avoco/features.hpp"
#include "avoco/rng.hpp"

using namespace avoco;

namespace {

PatchSet patches_from_norms(const std::vector<double>& norms, std::size_t d = 2) {
  Matrix m(norms.size(), d);
  for (std::size_t i = 0; i < norms.size(); ++i) m(i, 0) = norms[i];
  return PatchSet(std::move(m));
}

PatchSet random_patches(std::size_t n, std::size_t d, Rng& rng, double scale = 1.0) {
  Matrix m(n, d);
  for (double& x : m.data()) x = scale * rng.normal();
  return PatchSet(std::move(m));
}

AttentionMap random_attention(std::size_t n, Rng& rng) {
  Matrix m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += (m(r, c) = rng.uniform() + 1e-3);
    for (std::size_t c = 0; c < n; ++c) m(r, c) /= s;
    double fix = 1.0;
    for (std::size_t c = 1; c < n; ++c) fix -= m(r, c);
    m(r, 0) = fix;
  }
  return AttentionMap(std::move(m));
}

// -sum p log p on softmax(norms / tau), evaluated directly in long double.
double naive_entropy(const PatchSet& p, double tau) {
  std::vector<long double> w;
  long double z = 0;
  for (std::size_t i = 0; i < p.count(); ++i) {
    long double sq = 0;
    for (double x : p.matrix().row(i)) sq += static_cast<long double>(x) * x;
    w.push_back(std::exp(std::sqrt(sq) / tau));
    z += w.back();
  }
  long double h = 0;
  for (long double wi : w) {
    const long double q = wi / z;
    if (q > 0) h -= q * std::log(q);
  }
  return static_cast<double>(h);
}

}  // namespace

TEST_SUITE("complexity-features") {
  TEST_CASE("entropy of norms 1, 2, 3") {
    CHECK(patch_entropy(patches_from_norms({1, 2, 3})) == doctest::Approx(0.8323955818).epsilon(1e-9));
  }

  TEST_CASE("equal norms give log N") {
    for (std::size_t n : {2u, 5u, 16u, 64u}) {
      CHECK(patch_entropy(patches_from_norms(std::vector<double>(n, 3.7))) ==
            doctest::Approx(std::log(static_cast<double>(n))).epsilon(1e-12));
    }
  }

  TEST_CASE("single patch has zero entropy") {
    CHECK(patch_entropy(patches_from_norms({5.0})) == 0.0);
  }

  TEST_CASE("one huge norm collapses entropy without overflow") {
    const double h = patch_entropy(patches_from_norms({1e6, 1, 1, 1}));
    CHECK(std::isfinite(h));
    CHECK(h >= 0.0);
    CHECK(h < 1e-12);
  }

  TEST_CASE("entropy matches the direct formula and stays in [0, log N]") {
    Rng rng(31);
    for (int t = 0; t < 200; ++t) {
      const std::size_t n = 2 + rng.index(40);
      const PatchSet p = random_patches(n, 1 + rng.index(8), rng, rng.uniform(0.1, 3.0));
      const double tau = rng.uniform(0.3, 2.0);
      const double h = patch_entropy(p, tau);
      CHECK(h == doctest::Approx(naive_entropy(p, tau)).epsilon(1e-10));
      CHECK(h >= 0.0);
      CHECK(h <= std::log(static_cast<double>(n)));
    }
  }

  TEST_CASE("entropy is invariant to patch order and to sign flips of dimensions") {
    Rng rng(32);
    for (int t = 0; t < 50; ++t) {
      const PatchSet p = random_patches(12, 4, rng);
      Matrix permuted(12, 4), flipped = p.matrix();
      for (std::size_t i = 0; i < 12; ++i) {
        for (std::size_t j = 0; j < 4; ++j) permuted(i, j) = p.matrix()(11 - i, j);
      }
      for (std::size_t i = 0; i < 12; ++i) flipped(i, 2) = -flipped(i, 2);
      CHECK(patch_entropy(PatchSet(permuted)) == doctest::Approx(patch_entropy(p)).epsilon(1e-13));
      CHECK(patch_entropy(PatchSet(flipped)) == patch_entropy(p));
    }
  }

  TEST_CASE("scaling norms and temperature together leaves entropy unchanged") {
    Rng rng(33);
    const PatchSet p = random_patches(10, 3, rng);
    Matrix scaled = p.matrix();
    for (double& x : scaled.data()) x *= 2.5;
    CHECK(patch_entropy(PatchSet(scaled), 2.5) == doctest::Approx(patch_entropy(p, 1.0)).epsilon(1e-12));
  }

  TEST_CASE("entropy rejects a non-positive temperature") {
    CHECK_THROWS_AS(patch_entropy(patches_from_norms({1, 2}), 0.0), ParameterError);
  }

  TEST_CASE("mean and variance agree with a two-pass computation") {
    Rng rng(34);
    for (int t = 0; t < 20; ++t) {
      const std::size_t n = 1 + rng.index(30), d = 1 + rng.index(6);
      const PatchSet p = random_patches(n, d, rng, 10.0);
      const auto mv = patch_mean_variance(p);
      for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += p.matrix()(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (p.matrix()(i, j) - mean) * (p.matrix()(i, j) - mean);
        var /= static_cast<double>(n);
        CHECK(mv.mean[j] == doctest::Approx(mean).epsilon(1e-12));
        CHECK(mv.variance[j] == doctest::Approx(var).epsilon(1e-10));
        CHECK(mv.variance[j] >= 0.0);
      }
    }
  }

  TEST_CASE("identical patches have zero variance") {
    Matrix m(5, 3);
    for (std::size_t i = 0; i < 5; ++i) m(i, 0) = 1.5, m(i, 1) = -2.0, m(i, 2) = 1e8;
    const auto mv = patch_mean_variance(PatchSet(m));
    CHECK(mv.mean == Vector{1.5, -2.0, 1e8});
    for (double v : mv.variance) CHECK(v == 0.0);
  }

  TEST_CASE("attention variance: uniform is zero, identity is (N-1)/N^2") {
    for (std::size_t n : {2u, 3u, 8u}) {
      Matrix uni(n, n, 1.0 / static_cast<double>(n));
      CHECK(attention_variance(AttentionMap(uni)) == doctest::Approx(0.0));
      Matrix eye(n, n);
      for (std::size_t i = 0; i < n; ++i) eye(i, i) = 1.0;
      const double nn = static_cast<double>(n);
      CHECK(attention_variance(AttentionMap(eye)) == doctest::Approx((nn - 1) / (nn * nn)).epsilon(1e-14));
    }
    CHECK(attention_variance(AttentionMap(Matrix(1, 1, 1.0))) == 0.0);
  }

  TEST_CASE("attention map validation") {
    CHECK_THROWS_AS(AttentionMap(Matrix(2, 3, 1.0 / 3)), ShapeError);
    CHECK_THROWS_AS(AttentionMap(Matrix(2, 2, Vector{0.5, 0.6, 0.5, 0.5})), ParameterError);
    CHECK_THROWS_AS(AttentionMap(Matrix(2, 2, Vector{1.5, -0.5, 0.5, 0.5})), ParameterError);
    CHECK_NOTHROW(AttentionMap(Matrix(2, 2, Vector{0.5, 0.5 + 5e-10, 0.5, 0.5})));
    CHECK_THROWS_AS(PatchSet(Matrix(0, 3)), ParameterError);
    CHECK_THROWS_AS(PatchSet(Matrix(2, 2, Vector{1, NAN, 0, 0})), ParameterError);
  }

  TEST_CASE("head reduction averages element-wise") {
    const AttentionMap a(Matrix(2, 2, Vector{1, 0, 0, 1}));
    const AttentionMap b(Matrix(2, 2, Vector{0, 1, 1, 0}));
    const std::vector<AttentionMap> heads{a, b};
    CHECK(reduce_heads(heads).matrix() == Matrix(2, 2, 0.5));
    const std::vector<AttentionMap> one{a};
    CHECK(reduce_heads(one) == a);
    const std::vector<AttentionMap> none;
    CHECK_THROWS_AS(reduce_heads(none), ParameterError);
  }

  TEST_CASE("assembled vector layout and shape checks") {
    Rng rng(35);
    const PatchSet p = random_patches(6, 3, rng);
    const AttentionMap a = random_attention(6, rng);
    const auto f = assemble_features(p, a);
    REQUIRE(f.assembled.size() == 2 * 3 + 2);
    const auto mv = patch_mean_variance(p);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(f.assembled[j] == mv.mean[j]);
      CHECK(f.assembled[3 + j] == mv.variance[j]);
    }
    CHECK(f.assembled[6] == patch_entropy(p));
    CHECK(f.assembled[7] == attention_variance(a));
    CHECK(f.patch_dim() == 3);
    CHECK_THROWS_AS(assemble_features(p, random_attention(5, rng)), ShapeError);
  }
}
