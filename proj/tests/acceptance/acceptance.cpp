// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "avoco/cli.hpp"
#include "avoco/error.hpp"
#include "avoco/features.hpp"
#include "avoco/gradient_suite.hpp"
#include "avoco/rate_predictor.hpp"
#include "avoco/retention.hpp"
#include "avoco/rng.hpp"
#include "avoco/token_allocator.hpp"
#include "avoco/trainer.hpp"

using namespace avoco;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double time_limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = time_limit_s <= 0.0 || elapsed < time_limit_s;
  const bool ok = o.passed && in_time;
  if (!ok) ++failures;
  char timing[96];
  if (time_limit_s > 0.0) {
    std::snprintf(timing, sizeof timing, "%.2fs, limit %.0fs", elapsed, time_limit_s);
  } else {
    std::snprintf(timing, sizeof timing, "%.2fs", elapsed);
  }
  std::printf("criterion %d: %s  %s | %s [%s]\n", id, ok ? "PASS" : "FAIL", title, o.detail.c_str(), timing);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome table_reproduction() {
  RunConfig cfg;
  cfg.table_path = fs::path(AVOCO_SOURCE_DIR) / "data" / "retention_table.csv";
  std::ostringstream sink;
  const int code = cmd_retention(cfg, sink);
  const auto table = BenchmarkTable::load(cfg.table_path.string());
  bool ok = code == kExitOk;
  std::string detail;
  std::size_t checked = 0;
  for (const auto& model : table.models()) {
    const auto published = published_average(model);
    if (!published) continue;
    const auto rows = table.rows_for(model);
    const double avg = average_retention(rows);
    const bool match = rows.size() == kPublishedBenchmarkCount && std::abs(avg - *published) <= kPublishedAverageTolerance;
    ok = ok && match;
    ++checked;
    detail += model + " " + fmt("%.3f", avg) + "/" + fmt("%.1f", *published) + (match ? "" : "(!)") + "; ";
  }
  ok = ok && checked == 4;
  return {ok, detail + "tolerance 0.05"};
}

Outcome gradient_suite() {
  GradientSuiteOptions opt;
  opt.instances = 20;
  opt.step = 1e-5;
  opt.tolerance = 1e-5;
  const auto reports = run_gradient_suite(opt);
  bool ok = reports.size() == gradient_paths().size();
  std::string detail;
  for (const auto& r : reports) {
    ok = ok && r.passed && r.instances >= 20 && r.max_relative_error < 1e-5;
    detail += r.path + " " + fmt("%.1e", r.max_relative_error) + "; ";
  }
  return {ok, detail + "20 instances/path, tolerance 1e-5"};
}

Outcome gumbel_max() {
  Rng rng(2024);
  const std::size_t draws = 100000;
  const std::size_t policies = 6;
  double worst_sigma = 0.0;
  bool ok = true;
  for (std::size_t p = 0; p < policies; ++p) {
    const std::size_t m = 3 + rng.index(3);
    Vector z(m);
    for (double& x : z) x = 1.5 * rng.normal();
    const auto policy = RatePolicy::from_logits(z);
    std::vector<std::size_t> hits(m, 0);
    for (std::size_t t = 0; t < draws; ++t) ++hits[gumbel_argmax(policy, draw_gumbel_noise(m, rng))];
    for (std::size_t j = 0; j < m; ++j) {
      const double pj = policy.probs[j];
      const double sigma = std::sqrt(static_cast<double>(draws) * pj * (1.0 - pj));
      const double dev = std::abs(static_cast<double>(hits[j]) - static_cast<double>(draws) * pj);
      const double in_sigma = sigma > 0 ? dev / sigma : (dev == 0 ? 0.0 : INFINITY);
      worst_sigma = std::max(worst_sigma, in_sigma);
      ok = ok && dev <= 3.0 * sigma;
    }
  }
  return {ok, std::to_string(policies) + " policies x 1e5 draws, worst deviation " + fmt("%.2f", worst_sigma) +
                  " sigma (bound 3)"};
}

Outcome entropy_law() {
  Rng rng(4);
  std::size_t violations = 0;
  double worst_equal = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.index(128), d = 1 + rng.index(16);
    Matrix m(n, d);
    const double scale = std::exp(rng.uniform(-3.0, 3.0));
    for (double& x : m.data()) x = scale * rng.normal();
    const double h = patch_entropy(PatchSet(m));
    if (!(h >= 0.0 && h <= std::log(static_cast<double>(n)))) ++violations;

    // Equal norms: random directions rescaled to a common length.
    const double r = std::exp(rng.uniform(-3.0, 3.0));
    Matrix eq(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      do {
        sq = 0.0;
        for (double& x : eq.row(i)) sq += (x = rng.normal()) * x;
      } while (sq == 0.0);
      for (double& x : eq.row(i)) x *= r / std::sqrt(sq);
    }
    worst_equal = std::max(worst_equal, std::abs(patch_entropy(PatchSet(eq)) - std::log(static_cast<double>(n))));
  }
  const bool ok = violations == 0 && worst_equal <= 1e-9;
  return {ok, "1000 random sets, " + std::to_string(violations) + " bound violations; equal-norm max |H - log N| " +
                  fmt("%.1e", worst_equal) + " (limit 1e-9)"};
}

Outcome policy_learning() {
  DatasetConfig dcfg;  // 300 scenes, 3 tiers, seed 7
  TrainConfig tcfg;    // 2000 steps, seed 7
  const auto result = train_predictor(build_dataset(dcfg), tcfg);
  const auto& m = result.report.tier_mean_inferred_count;
  bool ok = m.size() == 3 && result.report.monotonic && m.front() <= 1.5 && m.back() >= 3.0;
  std::string detail = "tier mean K";
  for (double x : m) detail += " " + fmt("%.3f", x);
  return {ok, detail + "; need non-decreasing, low <= 1.5, high >= 3.0"};
}

Outcome efficiency_collapse() {
  DatasetConfig dcfg;
  TrainConfig tcfg;
  tcfg.loss.lambda_comp = 0.0;
  const auto result = train_predictor(build_dataset(dcfg), tcfg);
  const bool ok = std::abs(result.mean_expected_count - 1.0) <= 0.05;
  return {ok, "lambda_comp = 0: mean expected count " + fmt("%.4f", result.mean_expected_count) + " (target 1 +/- 0.05)"};
}

Outcome expansion_law() {
  Rng rng(7);
  std::size_t bad = 0;
  for (int t = 0; t < 1000; ++t) {
    TokenSequence seq;
    const std::size_t prefix = rng.index(20), suffix = rng.index(20);
    for (std::size_t i = 0; i < prefix; ++i) seq.push_back(rng.index(4) ? Token::make_text("t" + std::to_string(rng.index(50))) : Token::voco());
    seq.push_back(Token::placeholder());
    for (std::size_t i = 0; i < suffix; ++i) seq.push_back(rng.index(4) ? Token::make_text("u" + std::to_string(rng.index(50))) : Token::voco());
    const int k = 1 + static_cast<int>(rng.index(16));
    const auto out = expand(seq, k);
    bool ok = out.size() == seq.size() + static_cast<std::size_t>(k) - 1;
    for (std::size_t i = 0; ok && i < prefix; ++i) ok = out[i] == seq[i];
    for (int i = 0; ok && i < k; ++i) ok = out[prefix + static_cast<std::size_t>(i)] == Token::voco();
    for (std::size_t i = 0; ok && i < suffix; ++i) ok = out[prefix + static_cast<std::size_t>(k) + i] == seq[prefix + 1 + i];
    if (!ok) ++bad;
  }
  return {bad == 0, "1000 (sequence, K) pairs, " + std::to_string(bad) + " violations"};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "avoco_acceptance_determinism";
  fs::remove_all(root);
  std::string detail;
  std::string files[2][3];
  for (int run = 0; run < 2; ++run) {
    const std::string dir = (root / ("run" + std::to_string(run))).string();
    std::ostringstream out, err;
    if (run_cli({"gen", "--seed", "7", "--output-dir", dir}, out, err) != kExitOk ||
        run_cli({"train", "--seed", "7", "--output-dir", dir}, out, err) != kExitOk) {
      return {false, "run " + std::to_string(run) + " failed: " + err.str()};
    }
    files[run][0] = slurp(fs::path(dir) / "dataset.avds");
    files[run][1] = slurp(fs::path(dir) / "predictor.avck");
    files[run][2] = slurp(fs::path(dir) / "train_log.csv");
  }
  const bool ok = !files[0][0].empty() && !files[0][1].empty() && files[0][0] == files[1][0] &&
                  files[0][1] == files[1][1] && files[0][2] == files[1][2];
  fs::remove_all(root);
  return {ok, "dataset " + std::to_string(files[0][0].size()) + " B, checkpoint " + std::to_string(files[0][1].size()) +
                  " B, log " + std::to_string(files[0][2].size()) + " B: " + (ok ? "bit-identical" : "differ")};
}

}  // namespace

int main() {
  criterion(1, "published retention averages", 1.0, table_reproduction);
  criterion(2, "gradient suite", 30.0, gradient_suite);
  criterion(3, "Gumbel-max frequencies", 10.0, gumbel_max);
  criterion(4, "entropy bounds", 0.0, entropy_law);
  criterion(5, "policy learning on three tiers", 120.0, policy_learning);
  criterion(6, "rate-only training collapses to k_min", 60.0, efficiency_collapse);
  criterion(7, "expansion law", 0.0, expansion_law);
  criterion(8, "gen + train determinism", 0.0, determinism);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
