// SPDX-License-Identifier: Apache-2.0
#include "avoco/retention.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <string>

#include "avoco/error.hpp"

namespace avoco {

double retention(const BenchmarkRow& row) {
  if (!(row.upper > row.lower)) {
    throw DomainError("row \"" + row.name + "\" has upper bound " + std::to_string(row.upper) +
                      " <= lower bound " + std::to_string(row.lower));
  }
  return 100.0 * (row.result - row.lower) / (row.upper - row.lower);
}

double average_retention(std::span<const BenchmarkRow> rows) {
  if (rows.empty()) throw ParameterError("average_retention needs at least one row");
  double sum = 0.0;
  for (const auto& r : rows) sum += retention(r);
  return sum / static_cast<double>(rows.size());
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

BenchmarkTable BenchmarkTable::parse(std::istream& in) {
  BenchmarkTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"model", "benchmark", "value"}) {
        throw FormatError("expected header \"model,benchmark,value\"", line_no);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) throw FormatError("expected 3 fields, got " + std::to_string(fields.size()), line_no);
    if (fields[0].empty() || fields[1].empty()) throw FormatError("empty model or benchmark name", line_no);
    double value = 0.0;
    const auto& v = fields[2];
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(value)) {
      throw FormatError("cannot parse value \"" + v + "\"", line_no);
    }
    if (table.lookup(fields[0], fields[1])) {
      throw FormatError("duplicate entry for " + fields[0] + " / " + fields[1], line_no);
    }
    table.entries_.push_back({fields[0], fields[1], value});
  }
  if (!header_seen) throw FormatError("empty table", line_no);
  return table;
}

BenchmarkTable BenchmarkTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse(in);
}

std::optional<double> BenchmarkTable::lookup(std::string_view model, std::string_view benchmark) const {
  for (const auto& e : entries_) {
    if (e.model == model && e.benchmark == benchmark) return e.value;
  }
  return std::nullopt;
}

std::vector<std::string> BenchmarkTable::models() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.model == kUpperBoundModel || e.model == kLowerBoundModel) continue;
    if (std::find(out.begin(), out.end(), e.model) == out.end()) out.push_back(e.model);
  }
  return out;
}

std::vector<std::string> BenchmarkTable::benchmarks(std::string_view model) const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.model == model) out.push_back(e.benchmark);
  }
  return out;
}

std::vector<BenchmarkRow> BenchmarkTable::rows_for(std::string_view model) const {
  std::vector<BenchmarkRow> rows;
  for (const auto& e : entries_) {
    if (e.model != model) continue;
    const auto upper = lookup(kUpperBoundModel, e.benchmark);
    const auto lower = lookup(kLowerBoundModel, e.benchmark);
    if (!upper || !lower) throw DomainError("benchmark \"" + e.benchmark + "\" lacks an upper or lower bound row");
    BenchmarkRow row{e.model + " / " + e.benchmark, e.value, *upper, *lower};
    retention(row);  // validates upper > lower
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<double> published_average(std::string_view model) {
  static const std::map<std::string, double, std::less<>> published = {
      {"Q-Former", 57.2}, {"Avg. Pool", 64.1}, {"VoCo-LLaMA", 81.0}, {"Adaptive-VoCo", 89.3}};
  const auto it = published.find(model);
  if (it == published.end()) return std::nullopt;
  return it->second;
}

PolicyReport summarize_policies(std::span<const double> dials, std::span<const RatePolicy> policies,
                                const CandidateSet& candidates) {
  if (dials.empty()) throw ParameterError("cannot evaluate a policy on an empty dataset");
  if (dials.size() != policies.size()) throw ParameterError("dials and policies differ in length");

  PolicyReport report;
  report.tier_dials.assign(dials.begin(), dials.end());
  std::sort(report.tier_dials.begin(), report.tier_dials.end());
  report.tier_dials.erase(std::unique(report.tier_dials.begin(), report.tier_dials.end()), report.tier_dials.end());
  const std::size_t tiers = report.tier_dials.size();
  report.tier_sizes.assign(tiers, 0);
  report.tier_mean_expected_count.assign(tiers, 0.0);
  report.tier_mean_inferred_count.assign(tiers, 0.0);

  double total = 0.0;
  for (std::size_t i = 0; i < dials.size(); ++i) {
    const auto t = static_cast<std::size_t>(
        std::lower_bound(report.tier_dials.begin(), report.tier_dials.end(), dials[i]) - report.tier_dials.begin());
    const int k = infer_count(policies[i], candidates);
    report.inferred_counts.push_back(k);
    report.tier_sizes[t] += 1;
    report.tier_mean_expected_count[t] += policies[i].expected_count(candidates);
    report.tier_mean_inferred_count[t] += k;
    total += k;
  }
  for (std::size_t t = 0; t < tiers; ++t) {
    const double n = static_cast<double>(report.tier_sizes[t]);
    report.tier_mean_expected_count[t] /= n;
    report.tier_mean_inferred_count[t] /= n;
  }
  report.mean_count = total / static_cast<double>(dials.size());
  report.monotonic = std::is_sorted(report.tier_mean_inferred_count.begin(), report.tier_mean_inferred_count.end());
  return report;
}

PolicyReport evaluate_policy(const Checkpoint& predictor, const SyntheticDataset& dataset,
                             const CandidateSet& candidates, double tau_e) {
  if (dataset.scenes.empty()) throw ParameterError("cannot evaluate a policy on an empty dataset");
  if (predictor.params.out_dim() != candidates.size()) {
    throw ShapeError("predictor emits " + std::to_string(predictor.params.out_dim()) + " logits for " +
                     std::to_string(candidates.size()) + " candidates");
  }
  const auto features = extract_features(dataset, tau_e);
  std::vector<double> dials;
  std::vector<RatePolicy> policies;
  for (std::size_t i = 0; i < features.size(); ++i) {
    dials.push_back(dataset.scenes[i].spec.complexity_dial);
    policies.push_back(predict_policy(predictor, features[i]));
  }
  return summarize_policies(dials, policies, candidates);
}

}  // namespace avoco
