// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "avoco/checkpoint.hpp"
#include "avoco/objective.hpp"
#include "avoco/optimizer.hpp"
#include "avoco/rate_predictor.hpp"
#include "avoco/retention.hpp"
#include "avoco/synthetic.hpp"

namespace avoco {

struct TrainConfig {
  CandidateSet candidates = CandidateSet::standard();
  double tau_e = kDefaultEntropyTemperature;
  /// total_steps is overwritten with `steps`.
  AnnealSchedule anneal;
  LossConfig loss;
  /// Replace loss.gamma_a by the 95th percentile of log(1 + Var(A)) over the dataset.
  bool calibrate_gamma_a = true;
  double gamma_quantile = 0.95;
  /// Standardise network inputs with training-set statistics. Off by default:
  /// centring flips the sign of low-tier activations and the rate loss alone
  /// then parks those scenes on a saturated middle count.
  bool standardize_inputs = false;
  std::vector<std::size_t> hidden = {64, 64};
  AdamConfig adam;
  std::size_t batch_size = 32;
  std::size_t steps = 2000;
  std::uint64_t seed = 7;

  void validate() const;
};

struct TrainLogRow {
  std::size_t step = 0;
  double rate_loss = 0.0;
  double comp_loss = 0.0;
  double total = 0.0;
  double mean_expected_count = 0.0;
  double mean_target = 0.0;
};

struct TrainResult {
  Checkpoint predictor;
  std::vector<TrainLogRow> log;
  PolicyReport report;
  double gamma_a = 1.0;
  /// Mean expected count over the whole dataset after training.
  double mean_expected_count = 0.0;
};

/// Mini-batch training of the rate predictor on precomputed scene features.
/// Deterministic in config.seed. Throws NumericError naming the step when a
/// loss turns non-finite.
TrainResult train_predictor(const SyntheticDataset& dataset, const TrainConfig& config,
                            Execution exec = Execution::kParallel);

/// Header "step,rate_loss,comp_loss,total,mean_expected_count,mean_C".
void write_train_log(std::ostream& out, std::span<const TrainLogRow> rows);

}  // namespace avoco
