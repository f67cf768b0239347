// SPDX-License-Identifier: Apache-2.0
#include "avoco/gradient_suite.hpp"

#include <algorithm>
#include <cmath>

#include "avoco/error.hpp"
#include "avoco/gradcheck.hpp"
#include "avoco/mlp.hpp"
#include "avoco/objective.hpp"
#include "avoco/rate_predictor.hpp"
#include "avoco/rng.hpp"

namespace avoco {
namespace {

Vector normal_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  Vector v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

MlpParams random_mlp(const GradientSuiteOptions& o, Rng& rng) {
  std::vector<std::size_t> dims{2 * o.patch_dim + 2};
  dims.insert(dims.end(), o.hidden.begin(), o.hidden.end());
  dims.push_back(o.candidates.size());
  MlpParams p = make_mlp(dims, rng);
  for (auto& l : p.layers) {
    for (double& b : l.bias) b = rng.uniform(-0.5, 0.5);
  }
  return p;
}

std::vector<RatePolicy> policies_from_flat(std::span<const double> flat, std::size_t k) {
  std::vector<RatePolicy> out;
  for (std::size_t i = 0; i + k <= flat.size(); i += k) {
    out.push_back(RatePolicy::from_logits(Vector(flat.begin() + static_cast<std::ptrdiff_t>(i),
                                                 flat.begin() + static_cast<std::ptrdiff_t>(i + k))));
  }
  return out;
}

Vector concat(const std::vector<Vector>& parts) {
  Vector out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// One instance: returns the relative error of (analytic, numeric).
double check_instance(const std::string& path, const GradientSuiteOptions& o, Rng& rng) {
  const CandidateSet candidates(o.candidates);
  const std::size_t k = candidates.size();
  const bool corrupt = path == o.corrupt_path;
  auto finish = [&](Vector analytic, const Vector& numeric) {
    if (corrupt && !analytic.empty()) analytic[0] += 1.0 + std::abs(analytic[0]);
    return relative_error(analytic, numeric);
  };

  if (path == "mlp") {
    MlpParams params = random_mlp(o, rng);
    const Vector x = normal_vector(params.in_dim(), rng);
    const Vector w = normal_vector(params.out_dim(), rng);
    auto project = [&](const MlpParams& p, std::span<const double> input) {
      const Vector y = mlp_forward(p, input).output;
      double s = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j) s += w[j] * y[j];
      return s;
    };
    const auto fwd = mlp_forward(params, x);
    const MlpGradients g = mlp_backward(params, fwd.cache, w);
    MlpParams probe = params;
    const Vector theta = flatten_parameters(params);
    const Vector num_theta = finite_difference_gradient(
        [&](std::span<const double> t) {
          assign_parameters(probe, t);
          return project(probe, x);
        },
        theta, o.step);
    const Vector num_x = finite_difference_gradient([&](std::span<const double> in) { return project(params, in); },
                                                    x, o.step);
    return std::max(finish(flatten_gradients(g), num_theta), relative_error(g.input, num_x));
  }
  if (path == "log_softmax") {
    const Vector z = normal_vector(k, rng, 2.0);
    const Vector w = normal_vector(k, rng);
    auto f = [&](std::span<const double> logits) {
      const Vector lp = log_softmax(logits);
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += w[j] * lp[j];
      return s;
    };
    const Vector p = softmax(z);
    double wsum = 0.0;
    for (double x : w) wsum += x;
    Vector analytic(k);
    for (std::size_t j = 0; j < k; ++j) analytic[j] = w[j] - p[j] * wsum;
    return finish(analytic, finite_difference_gradient(f, z, o.step));
  }
  if (path == "gumbel") {
    const Vector z = normal_vector(k, rng, 1.5);
    const Vector noise = draw_gumbel_noise(k, rng);
    const double tau = rng.uniform(0.3, 2.0);
    const RatePolicy policy = RatePolicy::from_logits(z);
    const GumbelSample y = gumbel_softmax_relax(policy, candidates, tau, noise);
    auto f = [&](std::span<const double> logits) {
      return gumbel_softmax_relax(RatePolicy::from_logits(Vector(logits.begin(), logits.end())), candidates, tau, noise)
          .expected_count;
    };
    return finish(gumbel_expected_count_gradient(policy, y, candidates), finite_difference_gradient(f, z, o.step));
  }
  if (path == "rate_loss" || path == "comp_loss") {
    const Vector flat = normal_vector(k * o.batch_size, rng, 2.0);
    Vector targets(o.batch_size);
    for (double& t : targets) t = rng.uniform();
    const bool rate = path == "rate_loss";
    auto f = [&](std::span<const double> z) {
      const auto pol = policies_from_flat(z, k);
      return rate ? rate_loss(pol, candidates) : comp_loss(pol, targets, candidates);
    };
    const auto pol = policies_from_flat(flat, k);
    const Vector analytic = concat(rate ? rate_loss_logit_gradients(pol, candidates)
                                        : comp_loss_logit_gradients(pol, targets, candidates));
    return finish(analytic, finite_difference_gradient(f, flat, o.step));
  }
  if (path == "joint") {
    MlpParams params = random_mlp(o, rng);
    std::vector<TrainingSample> batch(o.batch_size);
    for (auto& s : batch) {
      s.input = normal_vector(params.in_dim(), rng);
      s.target = rng.uniform();
      s.noise = draw_gumbel_noise(k, rng);
    }
    LossConfig cfg;
    cfg.lambda_task = 0.5;
    const double tau = rng.uniform(0.3, 2.0);
    const JointResult r = joint_loss_and_gradients(params, batch, candidates, cfg, tau);
    MlpParams probe = params;
    const Vector numeric = finite_difference_gradient(
        [&](std::span<const double> t) {
          assign_parameters(probe, t);
          return joint_loss_and_gradients(probe, batch, candidates, cfg, tau).losses.total;
        },
        flatten_parameters(params), o.step);
    return finish(flatten_gradients(r.gradients), numeric);
  }
  throw ParameterError("unknown gradient path \"" + path + "\"");
}

}  // namespace

std::vector<PathReport> run_gradient_suite(const GradientSuiteOptions& options) {
  if (!(options.step > 0.0)) throw ParameterError("finite-difference step must be positive");
  if (!(options.tolerance > 0.0)) throw ParameterError("gradient tolerance must be positive");
  if (options.batch_size == 0) throw ParameterError("gradient-check batch size must be >= 1");
  if (!options.corrupt_path.empty()) {
    const auto& paths = gradient_paths();
    if (std::find(paths.begin(), paths.end(), options.corrupt_path) == paths.end()) {
      throw ParameterError("unknown gradient path \"" + options.corrupt_path + "\"");
    }
  }
  CandidateSet{options.candidates};  // validates
  std::vector<PathReport> reports;
  for (std::size_t p = 0; p < gradient_paths().size(); ++p) {
    const auto& path = gradient_paths()[p];
    Rng rng(derive_seed(options.seed, p));
    PathReport report{path, options.instances, 0.0, true};
    for (std::size_t i = 0; i < options.instances; ++i) {
      report.max_relative_error = std::max(report.max_relative_error, check_instance(path, options, rng));
    }
    report.passed = report.max_relative_error < options.tolerance;
    reports.push_back(report);
  }
  return reports;
}

}  // namespace avoco
