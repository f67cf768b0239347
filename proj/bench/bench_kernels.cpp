// SPDX-License-Identifier: Apache-2.0
// Serial reference vs OpenMP path for the data-parallel kernels.
#include <benchmark/benchmark.h>

#include "avoco/objective.hpp"
#include "avoco/rng.hpp"
#include "avoco/synthetic.hpp"

namespace {

using avoco::Execution;

avoco::DatasetConfig dataset_config(std::int64_t count) {
  avoco::DatasetConfig c;
  c.count = static_cast<std::size_t>(count);
  return c;
}

void BM_GenerateDataset(benchmark::State& state, Execution exec) {
  const auto cfg = dataset_config(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(avoco::build_dataset(cfg, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ExtractFeatures(benchmark::State& state, Execution exec) {
  const auto ds = avoco::build_dataset(dataset_config(state.range(0)), Execution::kSerial);
  for (auto _ : state) benchmark::DoNotOptimize(avoco::extract_features(ds, 1.0, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_JointLoss(benchmark::State& state, Execution exec) {
  const auto batch_size = static_cast<std::size_t>(state.range(0));
  avoco::Rng rng(7);
  const std::vector<std::size_t> dims{66, 64, 64, 3};
  const auto params = avoco::make_mlp(dims, rng);
  std::vector<avoco::TrainingSample> batch(batch_size);
  for (auto& s : batch) {
    s.input.resize(66);
    for (double& x : s.input) x = rng.normal();
    s.target = rng.uniform();
  }
  const auto candidates = avoco::CandidateSet::standard();
  const avoco::LossConfig loss;
  for (auto _ : state) {
    benchmark::DoNotOptimize(avoco::joint_loss_and_gradients(params, batch, candidates, loss, 1.0, exec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_GenerateDataset, serial, Execution::kSerial)->Arg(300);
BENCHMARK_CAPTURE(BM_GenerateDataset, parallel, Execution::kParallel)->Arg(300);
BENCHMARK_CAPTURE(BM_ExtractFeatures, serial, Execution::kSerial)->Arg(300);
BENCHMARK_CAPTURE(BM_ExtractFeatures, parallel, Execution::kParallel)->Arg(300);
BENCHMARK_CAPTURE(BM_JointLoss, serial, Execution::kSerial)->Arg(32)->Arg(256);
BENCHMARK_CAPTURE(BM_JointLoss, parallel, Execution::kParallel)->Arg(32)->Arg(256);

BENCHMARK_MAIN();
