// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include "avoco/error.hpp"
#include "avoco/trainer.hpp"

using namespace avoco;

namespace {

SyntheticDataset small_dataset() {
  DatasetConfig cfg;
  cfg.count = 30;
  cfg.n_patches = 16;
  cfg.dim = 4;
  cfg.seed = 11;
  return build_dataset(cfg);
}

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.hidden = {8, 8};
  cfg.steps = 150;
  cfg.batch_size = 8;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("training is deterministic and independent of the execution path") {
    const auto ds = small_dataset();
    const auto a = train_predictor(ds, quick_config(), Execution::kSerial);
    const auto b = train_predictor(ds, quick_config(), Execution::kParallel);
    const auto c = train_predictor(ds, quick_config(), Execution::kParallel);
    CHECK(encode_checkpoint(a.predictor) == encode_checkpoint(b.predictor));
    CHECK(encode_checkpoint(b.predictor) == encode_checkpoint(c.predictor));
    TrainConfig other = quick_config();
    other.seed = 6;
    CHECK(encode_checkpoint(train_predictor(ds, other).predictor) != encode_checkpoint(a.predictor));
  }

  TEST_CASE("result contents") {
    const auto ds = small_dataset();
    const auto r = train_predictor(ds, quick_config());
    CHECK(r.log.size() == 150);
    CHECK(r.log.front().step == 1);
    CHECK(r.log.back().step == 150);
    CHECK(r.predictor.params.dims() == std::vector<std::size_t>{10, 8, 8, 3});
    CHECK(r.predictor.params.moments.empty());
    CHECK_FALSE(r.predictor.scaler.has_value());
    CHECK(r.gamma_a > 0.0);
    CHECK(r.gamma_a < 1.0);
    CHECK(r.report.tier_dials == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(r.mean_expected_count >= 1.0);
    CHECK(r.mean_expected_count <= 4.0);
    const auto again = evaluate_policy(r.predictor, ds, CandidateSet::standard());
    CHECK(again.inferred_counts == r.report.inferred_counts);
  }

  TEST_CASE("comp loss falls during training") {
    TrainConfig cfg = quick_config();
    cfg.steps = 600;
    const auto r = train_predictor(small_dataset(), cfg);
    double early = 0, late = 0;
    for (std::size_t i = 0; i < 50; ++i) {
      early += r.log[i].comp_loss;
      late += r.log[r.log.size() - 1 - i].comp_loss;
    }
    CHECK(late < 0.5 * early);
  }

  TEST_CASE("gamma calibration can be switched off") {
    TrainConfig cfg = quick_config();
    cfg.calibrate_gamma_a = false;
    cfg.loss.gamma_a = 2.0;
    CHECK(train_predictor(small_dataset(), cfg).gamma_a == 2.0);
  }

  TEST_CASE("standardised inputs store a scaler that evaluation applies") {
    TrainConfig cfg = quick_config();
    cfg.standardize_inputs = true;
    const auto ds = small_dataset();
    const auto r = train_predictor(ds, cfg);
    REQUIRE(r.predictor.scaler.has_value());
    CHECK(r.predictor.scaler->shift.size() == 10);
    const auto again = evaluate_policy(decode_checkpoint(encode_checkpoint(r.predictor)), ds, CandidateSet::standard());
    CHECK(again.inferred_counts == r.report.inferred_counts);
  }

  TEST_CASE("task proxy path trains") {
    TrainConfig cfg = quick_config();
    cfg.loss.lambda_task = 0.5;
    const auto a = train_predictor(small_dataset(), cfg);
    // The task term is C (1 - K / k_max) >= 0, so it can only add to the total.
    for (const auto& row : a.log) CHECK(row.total >= 0.1 * row.rate_loss + row.comp_loss - 1e-15);
    CHECK(encode_checkpoint(a.predictor) == encode_checkpoint(train_predictor(small_dataset(), cfg).predictor));
  }

  TEST_CASE("log format") {
    std::vector<TrainLogRow> rows{{1, 0.5, 0.25, 0.3, 2.0, 0.4}};
    std::ostringstream out;
    write_train_log(out, rows);
    CHECK(out.str() == "step,rate_loss,comp_loss,total,mean_expected_count,mean_C\n1,0.5,0.25,0.29999999999999999,2,0.40000000000000002\n");
  }

  TEST_CASE("validation") {
    const auto ds = small_dataset();
    TrainConfig cfg = quick_config();
    cfg.steps = 0;
    CHECK_THROWS_AS(train_predictor(ds, cfg), ParameterError);
    cfg = quick_config();
    cfg.batch_size = 0;
    CHECK_THROWS_AS(train_predictor(ds, cfg), ParameterError);
    cfg = quick_config();
    cfg.hidden = {8, 0};
    CHECK_THROWS_AS(train_predictor(ds, cfg), ParameterError);
    cfg = quick_config();
    cfg.adam.learning_rate = -1;
    CHECK_THROWS_AS(train_predictor(ds, cfg), ParameterError);
    CHECK_THROWS_AS(train_predictor(SyntheticDataset{}, quick_config()), ParameterError);
  }
}
