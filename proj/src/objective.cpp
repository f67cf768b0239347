// SPDX-License-Identifier: Apache-2.0
#include "avoco/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "avoco/error.hpp"

namespace avoco {

void LossConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ParameterError("alpha and beta must be >= 0");
  if (!(gamma_a > 0.0) || !std::isfinite(gamma_a)) throw ParameterError("gamma_a must be positive");
  if (!(lambda_rate >= 0.0) || !(lambda_comp >= 0.0) || !(lambda_task >= 0.0)) {
    throw ParameterError("loss weights must be >= 0");
  }
}

double normalized_expected_count(const RatePolicy& policy, const CandidateSet& candidates) {
  return policy.expected_count(candidates) / candidates.max();
}

double rate_loss(std::span<const RatePolicy> policies, const CandidateSet& candidates) {
  if (policies.empty()) throw ParameterError("rate_loss needs a non-empty batch");
  double sum = 0.0;
  for (const auto& p : policies) sum += p.expected_count(candidates);
  return sum / (static_cast<double>(policies.size()) * candidates.max());
}

double comp_loss(std::span<const RatePolicy> policies, std::span<const double> targets,
                 const CandidateSet& candidates) {
  if (policies.empty()) throw ParameterError("comp_loss needs a non-empty batch");
  if (policies.size() != targets.size()) throw ShapeError("comp_loss: policies and targets differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const double gap = normalized_expected_count(policies[i], candidates) - targets[i];
    sum += gap * gap;
  }
  return sum / static_cast<double>(policies.size());
}

namespace {

// d E[k] / d z_j = pi_j (k_j - E[k])
Vector expected_count_gradient(const RatePolicy& policy, const CandidateSet& candidates) {
  const double e = policy.expected_count(candidates);
  Vector g(policy.probs.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = policy.probs[j] * (candidates[j] - e);
  return g;
}

}  // namespace

std::vector<Vector> rate_loss_logit_gradients(std::span<const RatePolicy> policies, const CandidateSet& candidates) {
  if (policies.empty()) throw ParameterError("rate_loss needs a non-empty batch");
  const double scale = 1.0 / (static_cast<double>(policies.size()) * candidates.max());
  std::vector<Vector> grads;
  grads.reserve(policies.size());
  for (const auto& p : policies) {
    Vector g = expected_count_gradient(p, candidates);
    for (double& x : g) x *= scale;
    grads.push_back(std::move(g));
  }
  return grads;
}

std::vector<Vector> comp_loss_logit_gradients(std::span<const RatePolicy> policies, std::span<const double> targets,
                                              const CandidateSet& candidates) {
  if (policies.empty()) throw ParameterError("comp_loss needs a non-empty batch");
  if (policies.size() != targets.size()) throw ShapeError("comp_loss: policies and targets differ in length");
  const double b = static_cast<double>(policies.size());
  std::vector<Vector> grads;
  grads.reserve(policies.size());
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const double gap = normalized_expected_count(policies[i], candidates) - targets[i];
    const double scale = 2.0 * gap / (b * candidates.max());
    Vector g = expected_count_gradient(policies[i], candidates);
    for (double& x : g) x *= scale;
    grads.push_back(std::move(g));
  }
  return grads;
}

double target_complexity(double entropy, double attention_variance, std::size_t n_patches, const LossConfig& config) {
  config.validate();
  if (n_patches < 2) throw DomainError("target complexity needs N >= 2 (log(1 + log N) vanishes at N = 1)");
  const double entropy_term = std::log1p(entropy) / std::log1p(std::log(static_cast<double>(n_patches)));
  const double attention_term = std::log1p(attention_variance) / config.gamma_a;
  return std::clamp(config.alpha * entropy_term + config.beta * attention_term, 0.0, 1.0);
}

double target_complexity(const PatchSet& patches, const AttentionMap& map, const LossConfig& config, double tau_e) {
  if (map.size() != patches.count()) throw ShapeError("attention map size differs from patch count");
  return target_complexity(patch_entropy(patches, tau_e), attention_variance(map), patches.count(), config);
}

double calibrate_gamma_a(std::span<const double> attention_variances, double quantile) {
  if (attention_variances.empty()) throw ParameterError("calibration needs at least one attention variance");
  if (!(quantile >= 0.0 && quantile <= 1.0)) throw ParameterError("quantile must be in [0, 1]");
  Vector logs;
  logs.reserve(attention_variances.size());
  for (double v : attention_variances) logs.push_back(std::log1p(v));
  std::sort(logs.begin(), logs.end());
  const double pos = quantile * static_cast<double>(logs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, logs.size() - 1);
  const double value = logs[lo] + (pos - static_cast<double>(lo)) * (logs[hi] - logs[lo]);
  return value > 0.0 ? value : 1.0;
}

double task_proxy_loss(std::span<const GumbelSample> samples, std::span<const double> targets,
                       const CandidateSet& candidates) {
  if (samples.empty()) throw ParameterError("task proxy needs a non-empty batch");
  if (samples.size() != targets.size()) throw ShapeError("task proxy: samples and targets differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    sum += targets[i] * (1.0 - samples[i].expected_count / candidates.max());
  }
  return sum / static_cast<double>(samples.size());
}

namespace {

struct SampleTerms {
  double normalized_count = 0.0;
  double rate = 0.0;  // un-averaged contributions
  double comp = 0.0;
  double task = 0.0;
  MlpGradients gradients;
};

SampleTerms sample_terms(const MlpParams& params, const TrainingSample& sample, std::size_t batch_size,
                         const CandidateSet& candidates, const LossConfig& config, double tau_g) {
  const auto fwd = mlp_forward(params, sample.input);
  const RatePolicy policy = RatePolicy::from_logits(fwd.output);
  const double kmax = candidates.max();
  const double b = static_cast<double>(batch_size);

  SampleTerms t;
  t.normalized_count = policy.expected_count(candidates) / kmax;
  t.rate = t.normalized_count;
  const double gap = t.normalized_count - sample.target;
  t.comp = gap * gap;

  const Vector de = expected_count_gradient(policy, candidates);
  const double coeff = config.lambda_rate / (b * kmax) + config.lambda_comp * 2.0 * gap / (b * kmax);
  Vector dz(de.size());
  for (std::size_t j = 0; j < de.size(); ++j) dz[j] = coeff * de[j];

  if (config.lambda_task > 0.0) {
    if (sample.noise.size() != candidates.size()) throw ShapeError("task proxy needs Gumbel noise per sample");
    const GumbelSample y = gumbel_softmax_relax(policy, candidates, tau_g, sample.noise);
    t.task = sample.target * (1.0 - y.expected_count / kmax);
    const Vector dk = gumbel_expected_count_gradient(policy, y, candidates);
    const double task_coeff = -config.lambda_task * sample.target / (b * kmax);
    for (std::size_t j = 0; j < dz.size(); ++j) dz[j] += task_coeff * dk[j];
  }
  t.gradients = mlp_backward(params, fwd.cache, dz);
  return t;
}

}  // namespace

JointResult joint_loss_and_gradients(const MlpParams& params, std::span<const TrainingSample> batch,
                                     const CandidateSet& candidates, const LossConfig& config, double tau_g,
                                     Execution exec) {
  config.validate();
  if (batch.empty()) throw ParameterError("joint loss needs a non-empty batch");
  if (params.out_dim() != candidates.size()) throw ShapeError("network output width differs from candidate count");

  std::vector<SampleTerms> terms(batch.size());
  for_each_index(batch.size(), exec, [&](std::size_t i) {
    terms[i] = sample_terms(params, batch[i], batch.size(), candidates, config, tau_g);
  });

  JointResult result;
  result.gradients = zero_gradients(params);
  auto& l = result.losses;
  const double b = static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& t = terms[i];
    if (!std::isfinite(t.rate) || !std::isfinite(t.comp) || !std::isfinite(t.task)) {
      throw NumericError("non-finite loss term for sample " + std::to_string(i));
    }
    l.rate_loss += t.rate;
    l.comp_loss += t.comp;
    l.task_loss += t.task;
    l.per_sample_C.push_back(batch[i].target);
    l.per_sample_expected_count.push_back(t.normalized_count * candidates.max());
    accumulate(result.gradients, t.gradients);
  }
  l.rate_loss /= b;
  l.comp_loss /= b;
  l.task_loss /= b;
  l.total = config.lambda_task * l.task_loss + config.lambda_rate * l.rate_loss + config.lambda_comp * l.comp_loss;
  if (!std::isfinite(l.total)) throw NumericError("non-finite total loss");
  return result;
}

}  // namespace avoco
