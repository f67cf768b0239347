// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avoco/checkpoint.hpp"
#include "avoco/rate_predictor.hpp"
#include "avoco/synthetic.hpp"

namespace avoco {

struct BenchmarkRow {
  std::string name;
  double result = 0.0;
  double upper = 0.0;
  double lower = 0.0;
};

/// 100 (result - lower) / (upper - lower); not clamped, so it can exceed 100.
/// Throws DomainError naming the row when upper <= lower.
double retention(const BenchmarkRow& row);

/// Arithmetic mean of per-row retentions. Throws ParameterError when empty.
double average_retention(std::span<const BenchmarkRow> rows);

inline constexpr std::string_view kUpperBoundModel = "Upper Bound";
inline constexpr std::string_view kLowerBoundModel = "Lower Bound";

/// Long-format results table (model, benchmark, value).
class BenchmarkTable {
 public:
  struct Entry {
    std::string model;
    std::string benchmark;
    double value = 0.0;
  };

  /// Expects the header "model,benchmark,value". Throws FormatError carrying
  /// the 1-based line number on malformed input.
  static BenchmarkTable parse(std::istream& in);
  static BenchmarkTable load(const std::string& path);

  /// Models in order of first appearance, bounds excluded.
  std::vector<std::string> models() const;
  std::vector<std::string> benchmarks(std::string_view model) const;

  /// Rows for `model`, each paired with the bound rows of the same benchmark.
  /// Throws DomainError if a bound is missing or upper <= lower.
  std::vector<BenchmarkRow> rows_for(std::string_view model) const;

 private:
  std::optional<double> lookup(std::string_view model, std::string_view benchmark) const;

  std::vector<Entry> entries_;
};

/// Published averages of the four compressed rows, keyed by model name.
std::optional<double> published_average(std::string_view model);
inline constexpr std::size_t kPublishedBenchmarkCount = 7;
inline constexpr double kPublishedAverageTolerance = 0.05;

struct PolicyReport {
  std::vector<double> tier_dials;
  std::vector<std::size_t> tier_sizes;
  std::vector<double> tier_mean_expected_count;
  std::vector<double> tier_mean_inferred_count;
  /// Per-scene inferred counts in dataset order.
  std::vector<int> inferred_counts;
  /// Tier means of inferred counts are non-decreasing in dial.
  bool monotonic = false;
  double mean_count = 0.0;
};

/// Groups by distinct dial value (ascending). Throws ParameterError when
/// inputs are empty or lengths differ.
PolicyReport summarize_policies(std::span<const double> dials, std::span<const RatePolicy> policies,
                                const CandidateSet& candidates);

PolicyReport evaluate_policy(const Checkpoint& predictor, const SyntheticDataset& dataset,
                             const CandidateSet& candidates, double tau_e = kDefaultEntropyTemperature);

}  // namespace avoco
