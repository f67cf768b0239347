// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "avoco/checkpoint.hpp"
#include "avoco/features.hpp"
#include "avoco/mlp.hpp"
#include "avoco/rng.hpp"

namespace avoco {

/// Strictly increasing menu of admissible token counts.
class CandidateSet {
 public:
  explicit CandidateSet(std::vector<int> counts);
  /// {1, 2, 4}
  static CandidateSet standard();

  std::span<const int> counts() const noexcept { return counts_; }
  std::size_t size() const noexcept { return counts_.size(); }
  int operator[](std::size_t j) const noexcept { return counts_[j]; }
  int min() const noexcept { return counts_.front(); }
  int max() const noexcept { return counts_.back(); }
  bool contains(int k) const noexcept;

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;

 private:
  std::vector<int> counts_;
};

Vector softmax(std::span<const double> logits);
Vector log_softmax(std::span<const double> logits);

/// Logits and their softmax.
struct RatePolicy {
  Vector logits;
  Vector probs;

  static RatePolicy from_logits(Vector logits);
  /// sum_j pi_j k_j
  double expected_count(const CandidateSet& candidates) const;
};

/// Runs the MLP on the assembled features. Throws ShapeError if the feature
/// length is not the network's in_dim.
RatePolicy predict_policy(const MlpParams& params, const ComplexityFeatures& features);
/// Same, applying the checkpoint's input scaler first when it has one.
RatePolicy predict_policy(const Checkpoint& predictor, const ComplexityFeatures& features);

inline constexpr double kProbabilityFloor = 1e-10;
inline constexpr double kUniformClamp = 1e-12;

/// g_j = -log(-log u_j), u_j ~ U(0,1) clamped to [1e-12, 1 - 1e-12].
Vector draw_gumbel_noise(std::size_t n, Rng& rng);

struct GumbelSample {
  Vector relaxed;              // y, a point on the simplex
  double expected_count = 0;   // y^T k
  double temperature = 0;      // tau_g
  Vector noise;                // the g_j used
};

/// y = softmax((log pi + g) / tau_g) with log pi = max(log_softmax(z), log 1e-10).
/// Throws ParameterError for tau_g <= 0.
GumbelSample gumbel_softmax_relax(const RatePolicy& policy, const CandidateSet& candidates, double tau_g,
                                  std::span<const double> noise);
GumbelSample gumbel_softmax_sample(const RatePolicy& policy, const CandidateSet& candidates, double tau_g, Rng& rng);

/// d(expected_count)/d(logits) for the noise held fixed.
Vector gumbel_expected_count_gradient(const RatePolicy& policy, const GumbelSample& sample,
                                      const CandidateSet& candidates);

/// argmax_j(log pi_j + g_j): an exact draw from Categorical(pi).
std::size_t gumbel_argmax(const RatePolicy& policy, std::span<const double> noise);

/// k at argmax(logits); ties go to the smallest candidate.
int infer_count(const RatePolicy& policy, const CandidateSet& candidates);

struct AnnealSchedule {
  double tau_start = 1.0;
  double tau_min = 0.1;
  std::size_t total_steps = 2000;
  /// Fraction of total_steps at which tau_min is reached.
  double horizon_fraction = 0.8;

  void validate() const;
  double decay_rate() const;
};

/// max(tau_min, tau_start * exp(-r * step)).
double anneal_temperature(std::size_t step, const AnnealSchedule& schedule);

}  // namespace avoco
