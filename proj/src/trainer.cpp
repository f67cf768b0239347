// SPDX-License-Identifier: Apache-2.0
#include "avoco/trainer.hpp"

#include <numeric>
#include <ostream>
#include <string>

#include "avoco/error.hpp"

namespace avoco {

void TrainConfig::validate() const {
  if (!(tau_e > 0.0)) throw ParameterError("tau_e must be positive");
  AnnealSchedule s = anneal;
  s.total_steps = steps;
  s.validate();
  loss.validate();
  if (!(gamma_quantile >= 0.0 && gamma_quantile <= 1.0)) throw ParameterError("gamma quantile must be in [0, 1]");
  for (auto h : hidden) {
    if (h == 0) throw ParameterError("hidden widths must be positive");
  }
  if (!(adam.learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ParameterError("optimizer decay rates must be in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw ParameterError("optimizer epsilon must be positive");
  if (batch_size == 0) throw ParameterError("batch size must be >= 1");
  if (steps == 0) throw ParameterError("steps must be >= 1");
}

namespace {

void shuffle(std::vector<std::size_t>& order, Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.index(i));
    std::swap(order[i - 1], order[j]);
  }
}

}  // namespace

TrainResult train_predictor(const SyntheticDataset& dataset, const TrainConfig& config, Execution exec) {
  config.validate();
  if (dataset.scenes.empty()) throw ParameterError("training needs a non-empty dataset");
  const std::size_t dim = dataset.scenes.front().patches.dim();
  for (const auto& s : dataset.scenes) {
    if (s.patches.dim() != dim) throw ShapeError("all scenes must share the patch dimension");
  }

  const auto features = extract_features(dataset, config.tau_e, exec);
  TrainResult result;
  LossConfig loss = config.loss;
  if (config.calibrate_gamma_a) {
    std::vector<double> variances;
    for (const auto& f : features) variances.push_back(f.attention_variance);
    loss.gamma_a = calibrate_gamma_a(variances, config.gamma_quantile);
  }
  result.gamma_a = loss.gamma_a;

  const std::size_t n = features.size();
  std::vector<Vector> raw_inputs;
  std::vector<double> targets;
  for (std::size_t i = 0; i < n; ++i) {
    raw_inputs.push_back(features[i].assembled);
    targets.push_back(target_complexity(features[i].entropy, features[i].attention_variance,
                                        dataset.scenes[i].patches.count(), loss));
  }
  if (config.standardize_inputs) result.predictor.scaler = InputScaler::fit(raw_inputs);
  std::vector<Vector> inputs;
  for (const auto& x : raw_inputs) inputs.push_back(result.predictor.scaler ? result.predictor.scaler->apply(x) : x);

  std::vector<std::size_t> dims{2 * dim + 2};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(config.candidates.size());
  Rng init_rng(derive_seed(config.seed, 0));
  MlpParams params = make_mlp(dims, init_rng);

  Rng batch_rng(derive_seed(config.seed, 1));
  AnnealSchedule schedule = config.anneal;
  schedule.total_steps = config.steps;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, batch_rng);
  std::size_t cursor = 0;

  std::vector<TrainingSample> batch(config.batch_size);
  result.log.reserve(config.steps);
  for (std::size_t step = 1; step <= config.steps; ++step) {
    const double tau_g = anneal_temperature(step - 1, schedule);
    for (auto& sample : batch) {
      if (cursor == n) {
        shuffle(order, batch_rng);
        cursor = 0;
      }
      const std::size_t idx = order[cursor++];
      sample.input = inputs[idx];
      sample.target = targets[idx];
      sample.noise.clear();
      if (loss.lambda_task > 0.0) sample.noise = draw_gumbel_noise(config.candidates.size(), batch_rng);
    }
    JointResult step_result;
    try {
      step_result = joint_loss_and_gradients(params, batch, config.candidates, loss, tau_g, exec);
      optimizer_step(params, step_result.gradients, config.adam.learning_rate, step, config.adam);
    } catch (const NumericError& e) {
      throw NumericError("training aborted at step " + std::to_string(step) + ": " + e.what());
    }
    const auto& l = step_result.losses;
    TrainLogRow row{step, l.rate_loss, l.comp_loss, l.total, 0.0, 0.0};
    for (std::size_t i = 0; i < batch.size(); ++i) {
      row.mean_expected_count += l.per_sample_expected_count[i];
      row.mean_target += l.per_sample_C[i];
    }
    row.mean_expected_count /= static_cast<double>(batch.size());
    row.mean_target /= static_cast<double>(batch.size());
    result.log.push_back(row);
  }

  params.moments.clear();
  result.predictor.params = std::move(params);

  std::vector<double> dials;
  std::vector<RatePolicy> policies;
  double expected = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dials.push_back(dataset.scenes[i].spec.complexity_dial);
    policies.push_back(RatePolicy::from_logits(mlp_forward(result.predictor.params, inputs[i]).output));
    expected += policies.back().expected_count(config.candidates);
  }
  result.mean_expected_count = expected / static_cast<double>(n);
  result.report = summarize_policies(dials, policies, config.candidates);
  return result;
}

void write_train_log(std::ostream& out, std::span<const TrainLogRow> rows) {
  const auto old_precision = out.precision(17);
  out << "step,rate_loss,comp_loss,total,mean_expected_count,mean_C\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.rate_loss << ',' << r.comp_loss << ',' << r.total << ',' << r.mean_expected_count << ','
        << r.mean_target << '\n';
  }
  out.precision(old_precision);
}

}  // namespace avoco
