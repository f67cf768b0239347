// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "avoco/features.hpp"
#include "avoco/mlp.hpp"
#include "avoco/parallel.hpp"
#include "avoco/rate_predictor.hpp"

namespace avoco {

struct LossConfig {
  double alpha = 0.5;
  double beta = 0.5;
  double gamma_a = 1.0;
  double lambda_rate = 0.1;
  double lambda_comp = 1.0;
  /// Weight of the demo task proxy; zero disables it and the Gumbel path.
  double lambda_task = 0.0;

  void validate() const;
};

/// (1/k_max) sum_j pi_j k_j
double normalized_expected_count(const RatePolicy& policy, const CandidateSet& candidates);

/// Mean over the batch of the normalised expected count.
double rate_loss(std::span<const RatePolicy> policies, const CandidateSet& candidates);

/// Mean squared gap between normalised expected count and target score.
/// Throws ShapeError when the lengths differ.
double comp_loss(std::span<const RatePolicy> policies, std::span<const double> targets,
                 const CandidateSet& candidates);

/// dL/dz for each policy in the batch.
std::vector<Vector> rate_loss_logit_gradients(std::span<const RatePolicy> policies, const CandidateSet& candidates);
std::vector<Vector> comp_loss_logit_gradients(std::span<const RatePolicy> policies, std::span<const double> targets,
                                              const CandidateSet& candidates);

/// C = alpha log(1+H)/log(1+log N) + beta log(1+Var(A))/gamma_a, clamped to
/// [0, 1]. Throws DomainError for N < 2.
double target_complexity(double entropy, double attention_variance, std::size_t n_patches, const LossConfig& config);
double target_complexity(const PatchSet& patches, const AttentionMap& map, const LossConfig& config,
                         double tau_e = kDefaultEntropyTemperature);

/// Quantile (linear interpolation) of log(1 + Var(A)) over a calibration
/// pass. Falls back to 1.0 when the quantile is not positive.
double calibrate_gamma_a(std::span<const double> attention_variances, double quantile = 0.95);

/// One row of a training batch.
struct TrainingSample {
  Vector input;         // network input (already scaled)
  double target = 0.0;  // C
  Vector noise;         // Gumbel noise for the task proxy; may be empty if lambda_task == 0
};

struct BatchLosses {
  double rate_loss = 0.0;
  double comp_loss = 0.0;
  double task_loss = 0.0;
  double total = 0.0;
  Vector per_sample_C;
  Vector per_sample_expected_count;
};

struct JointResult {
  BatchLosses losses;
  MlpGradients gradients;
};

/// Task proxy for demos (not part of the predictor's own objective):
/// mean_i C_i (1 - K_i / k_max), with K_i the relaxed Gumbel count. It rewards
/// larger sampled budgets on high-complexity samples.
double task_proxy_loss(std::span<const GumbelSample> samples, std::span<const double> targets,
                       const CandidateSet& candidates);

/// total = lambda_task L_task + lambda_rate L_rate + lambda_comp L_comp and
/// its exact gradient with respect to every network parameter. Per-sample
/// terms may run in parallel; reduction is in ascending sample order, so the
/// result does not depend on `exec`.
///
/// Throws NumericError naming the sample index when a loss term is not finite.
JointResult joint_loss_and_gradients(const MlpParams& params, std::span<const TrainingSample> batch,
                                     const CandidateSet& candidates, const LossConfig& config, double tau_g,
                                     Execution exec = Execution::kSerial);

}  // namespace avoco
