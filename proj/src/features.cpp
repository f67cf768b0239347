// SPDX-License-Identifier: Apache-2.0
#include "avoco/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "avoco/error.hpp"

namespace avoco {

PatchSet::PatchSet(Matrix patches) : patches_(std::move(patches)) {
  if (patches_.rows() < 1 || patches_.cols() < 1) throw ParameterError("a patch set needs N >= 1 and d >= 1");
  if (!patches_.all_finite()) throw ParameterError("patch embeddings must be finite");
}

AttentionMap::AttentionMap(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() < 1 || weights_.rows() != weights_.cols()) throw ShapeError("attention map must be square");
  for (std::size_t r = 0; r < weights_.rows(); ++r) {
    double sum = 0.0;
    for (double a : weights_.row(r)) {
      if (!std::isfinite(a) || a < 0.0) {
        throw ParameterError("attention entries must be finite and non-negative (row " + std::to_string(r) + ")");
      }
      sum += a;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw ParameterError("attention row " + std::to_string(r) + " sums to " + std::to_string(sum) + ", not 1");
    }
  }
}

AttentionMap reduce_heads(std::span<const AttentionMap> heads) {
  if (heads.empty()) throw ParameterError("reduce_heads needs at least one head");
  if (heads.size() == 1) return heads.front();
  const std::size_t n = heads.front().size();
  Matrix mean(n, n);
  for (const auto& h : heads) {
    if (h.size() != n) throw ShapeError("attention heads differ in size");
    for (std::size_t i = 0; i < mean.size(); ++i) mean.data()[i] += h.matrix().data()[i];
  }
  for (double& x : mean.data()) x /= static_cast<double>(heads.size());
  return AttentionMap(std::move(mean));
}

MeanVariance patch_mean_variance(const PatchSet& patches) {
  // Welford's update, one pass over the rows.
  const auto& p = patches.matrix();
  MeanVariance mv{Vector(p.cols(), 0.0), Vector(p.cols(), 0.0)};
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const double count = static_cast<double>(i + 1);
    const auto row = p.row(i);
    for (std::size_t j = 0; j < p.cols(); ++j) {
      const double delta = row[j] - mv.mean[j];
      mv.mean[j] += delta / count;
      mv.variance[j] += delta * (row[j] - mv.mean[j]);
    }
  }
  for (double& v : mv.variance) v = std::max(0.0, v / static_cast<double>(p.rows()));
  return mv;
}

double patch_entropy(const PatchSet& patches, double tau_e) {
  if (!(tau_e > 0.0) || !std::isfinite(tau_e)) throw ParameterError("entropy temperature must be positive");
  const auto& p = patches.matrix();
  const std::size_t n = p.rows();
  Vector logits(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (double x : p.row(i)) sq += x * x;
    logits[i] = std::sqrt(sq) / tau_e;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& x : logits) {
    x -= top;
    z += std::exp(x);
  }
  // H = log Z - sum_i q_i (x_i - max); terms with q_i == 0 vanish.
  double weighted = 0.0;
  for (double x : logits) weighted += std::exp(x) / z * x;
  const double h = std::log(z) - weighted;
  return std::clamp(h, 0.0, std::log(static_cast<double>(n)));
}

double attention_variance(const AttentionMap& map) {
  const auto a = map.matrix().data();
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double delta = a[i] - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (a[i] - mean);
  }
  return std::max(0.0, m2 / static_cast<double>(a.size()));
}

ComplexityFeatures assemble_features(const PatchSet& patches, const AttentionMap& map, double tau_e) {
  if (map.size() != patches.count()) {
    throw ShapeError("attention map is " + std::to_string(map.size()) + "x" + std::to_string(map.size()) + " but there are " +
                     std::to_string(patches.count()) + " patches");
  }
  auto [mean, variance] = patch_mean_variance(patches);
  ComplexityFeatures f;
  f.entropy = patch_entropy(patches, tau_e);
  f.attention_variance = attention_variance(map);
  f.assembled.reserve(2 * mean.size() + 2);
  f.assembled.insert(f.assembled.end(), mean.begin(), mean.end());
  f.assembled.insert(f.assembled.end(), variance.begin(), variance.end());
  f.assembled.push_back(f.entropy);
  f.assembled.push_back(f.attention_variance);
  f.mean = std::move(mean);
  f.variance = std::move(variance);
  return f;
}

}  // namespace avoco
