// SPDX-License-Identifier: Apache-2.0
#include "avoco/rate_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "avoco/error.hpp"

namespace avoco {

CandidateSet::CandidateSet(std::vector<int> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw ParameterError("candidate set is empty");
  for (std::size_t j = 0; j < counts_.size(); ++j) {
    if (counts_[j] < 1) throw ParameterError("candidate counts must be >= 1");
    if (j > 0 && counts_[j] <= counts_[j - 1]) throw ParameterError("candidate counts must be strictly increasing");
  }
}

CandidateSet CandidateSet::standard() { return CandidateSet({1, 2, 4}); }

bool CandidateSet::contains(int k) const noexcept { return std::binary_search(counts_.begin(), counts_.end(), k); }

Vector log_softmax(std::span<const double> logits) {
  if (logits.empty()) throw ShapeError("softmax of an empty vector");
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double x : logits) z += std::exp(x - top);
  const double lse = top + std::log(z);
  Vector out(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) out[j] = logits[j] - lse;
  return out;
}

Vector softmax(std::span<const double> logits) {
  if (logits.empty()) throw ShapeError("softmax of an empty vector");
  const double top = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double z = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = std::exp(logits[j] - top);
    z += out[j];
  }
  for (double& p : out) p /= z;
  return out;
}

RatePolicy RatePolicy::from_logits(Vector logits) {
  RatePolicy p;
  p.probs = softmax(logits);
  p.logits = std::move(logits);
  return p;
}

double RatePolicy::expected_count(const CandidateSet& candidates) const {
  if (probs.size() != candidates.size()) throw ShapeError("policy and candidate set differ in length");
  double e = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) e += probs[j] * candidates[j];
  return e;
}

RatePolicy predict_policy(const MlpParams& params, const ComplexityFeatures& features) {
  if (features.assembled.size() != params.in_dim()) {
    throw ShapeError("feature vector has length " + std::to_string(features.assembled.size()) + ", predictor expects " +
                     std::to_string(params.in_dim()));
  }
  return RatePolicy::from_logits(mlp_forward(params, features.assembled).output);
}

RatePolicy predict_policy(const Checkpoint& predictor, const ComplexityFeatures& features) {
  if (!predictor.scaler) return predict_policy(predictor.params, features);
  if (features.assembled.size() != predictor.params.in_dim()) {
    throw ShapeError("feature vector has length " + std::to_string(features.assembled.size()) + ", predictor expects " +
                     std::to_string(predictor.params.in_dim()));
  }
  return RatePolicy::from_logits(mlp_forward(predictor.params, predictor.scaler->apply(features.assembled)).output);
}

Vector draw_gumbel_noise(std::size_t n, Rng& rng) {
  Vector g(n);
  for (double& x : g) {
    const double u = std::clamp(rng.uniform(), kUniformClamp, 1.0 - kUniformClamp);
    x = -std::log(-std::log(u));
  }
  return g;
}

namespace {

Vector floored_log_probs(const RatePolicy& policy) {
  Vector lp = log_softmax(policy.logits);
  const double floor = std::log(kProbabilityFloor);
  for (double& x : lp) x = std::max(x, floor);
  return lp;
}

}  // namespace

GumbelSample gumbel_softmax_relax(const RatePolicy& policy, const CandidateSet& candidates, double tau_g,
                                  std::span<const double> noise) {
  if (!(tau_g > 0.0) || !std::isfinite(tau_g)) throw ParameterError("Gumbel temperature must be positive");
  if (policy.logits.size() != candidates.size() || noise.size() != candidates.size()) {
    throw ShapeError("policy, noise and candidate set differ in length");
  }
  const Vector lp = floored_log_probs(policy);
  Vector scores(lp.size());
  for (std::size_t j = 0; j < lp.size(); ++j) scores[j] = (lp[j] + noise[j]) / tau_g;
  GumbelSample s;
  s.relaxed = softmax(scores);
  s.temperature = tau_g;
  s.noise.assign(noise.begin(), noise.end());
  for (std::size_t j = 0; j < s.relaxed.size(); ++j) s.expected_count += s.relaxed[j] * candidates[j];
  s.expected_count = std::clamp(s.expected_count, static_cast<double>(candidates.min()),
                                static_cast<double>(candidates.max()));
  return s;
}

GumbelSample gumbel_softmax_sample(const RatePolicy& policy, const CandidateSet& candidates, double tau_g, Rng& rng) {
  if (!(tau_g > 0.0) || !std::isfinite(tau_g)) throw ParameterError("Gumbel temperature must be positive");
  const Vector noise = draw_gumbel_noise(candidates.size(), rng);
  return gumbel_softmax_relax(policy, candidates, tau_g, noise);
}

Vector gumbel_expected_count_gradient(const RatePolicy& policy, const GumbelSample& sample,
                                      const CandidateSet& candidates) {
  // dK/d(log pi_j) = y_j (k_j - K) / tau; floored entries are constant in z.
  const Vector lp = log_softmax(policy.logits);
  const double floor = std::log(kProbabilityFloor);
  Vector a(lp.size(), 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < lp.size(); ++j) {
    if (lp[j] < floor) continue;
    a[j] = sample.relaxed[j] * (candidates[j] - sample.expected_count) / sample.temperature;
    total += a[j];
  }
  // Chain through d(log pi_j)/dz_i = delta_ij - pi_i.
  Vector g(lp.size());
  for (std::size_t i = 0; i < lp.size(); ++i) g[i] = a[i] - policy.probs[i] * total;
  return g;
}

std::size_t gumbel_argmax(const RatePolicy& policy, std::span<const double> noise) {
  if (noise.size() != policy.logits.size()) throw ShapeError("noise length differs from policy");
  const Vector lp = log_softmax(policy.logits);
  std::size_t best = 0;
  for (std::size_t j = 1; j < lp.size(); ++j) {
    if (lp[j] + noise[j] > lp[best] + noise[best]) best = j;
  }
  return best;
}

int infer_count(const RatePolicy& policy, const CandidateSet& candidates) {
  if (policy.logits.size() != candidates.size()) throw ShapeError("policy and candidate set differ in length");
  std::size_t best = 0;
  for (std::size_t j = 1; j < policy.logits.size(); ++j) {
    if (policy.logits[j] > policy.logits[best]) best = j;
  }
  return candidates[best];
}

void AnnealSchedule::validate() const {
  if (!(tau_min > 0.0)) throw ParameterError("tau_min must be positive");
  if (!(tau_start >= tau_min)) throw ParameterError("tau_start must be >= tau_min");
  if (total_steps == 0) throw ParameterError("anneal schedule needs total_steps >= 1");
  if (!(horizon_fraction > 0.0 && horizon_fraction <= 1.0)) throw ParameterError("horizon_fraction must be in (0, 1]");
}

double AnnealSchedule::decay_rate() const {
  return std::log(tau_start / tau_min) / (horizon_fraction * static_cast<double>(total_steps));
}

double anneal_temperature(std::size_t step, const AnnealSchedule& schedule) {
  schedule.validate();
  return std::max(schedule.tau_min, schedule.tau_start * std::exp(-schedule.decay_rate() * static_cast<double>(step)));
}

}  // namespace avoco
