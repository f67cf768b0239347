// SPDX-License-Identifier: Apache-2.0
#include "avoco/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

#include "avoco/error.hpp"
#include "avoco/objective.hpp"
#include "avoco/retention.hpp"
#include "avoco/token_allocator.hpp"

namespace avoco {

void RunConfig::validate() const {
  dataset.validate();
  train.validate();
  if (gradcheck.batch_size == 0) throw ParameterError("gradcheck batch size must be >= 1");
  if (!(gradcheck.step > 0.0)) throw ParameterError("finite-difference step must be positive");
  if (!(gradcheck.tolerance > 0.0)) throw ParameterError("gradient tolerance must be positive");
  CandidateSet{gradcheck.candidates};
  if (allocate_dial && !(*allocate_dial >= 0.0 && *allocate_dial <= 1.0)) {
    throw ParameterError("--dial must be in [0, 1]");
  }
  const auto tokens = parse_tokens(prompt_template);
  const auto placeholders = std::count_if(tokens.begin(), tokens.end(),
                                          [](const Token& t) { return t.kind == Token::Kind::kPlaceholder; });
  if (placeholders != 1) throw StructureError("prompt template must contain exactly one <ph>");
}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : output_dir / p;
}

namespace {

Execution execution(const RunConfig& c) { return c.serial ? Execution::kSerial : Execution::kParallel; }

void ensure_parent(const std::filesystem::path& p) {
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + p.parent_path().string() + ": " + ec.message());
}

struct TierSummary {
  double dial = 0.0;
  std::size_t size = 0;
  double entropy = 0.0;
  double attention_variance = 0.0;
  double target = 0.0;
  double calibrated_target = 0.0;
};

}  // namespace

int cmd_gen(const RunConfig& config, std::ostream& out) {
  const auto dataset = build_dataset(config.dataset, execution(config));
  const auto path = config.resolve(config.dataset_path);
  ensure_parent(path);
  save_dataset(path, dataset);

  const auto features = extract_features(dataset, config.train.tau_e, execution(config));
  std::vector<double> variances;
  for (const auto& f : features) variances.push_back(f.attention_variance);
  LossConfig calibrated = config.train.loss;
  calibrated.gamma_a = calibrate_gamma_a(variances, config.train.gamma_quantile);

  std::map<double, TierSummary> tiers;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& s = dataset.scenes[i];
    auto& t = tiers[s.spec.complexity_dial];
    t.dial = s.spec.complexity_dial;
    t.size += 1;
    t.entropy += features[i].entropy;
    t.attention_variance += features[i].attention_variance;
    t.target += target_complexity(features[i].entropy, features[i].attention_variance, s.patches.count(),
                                  config.train.loss);
    t.calibrated_target +=
        target_complexity(features[i].entropy, features[i].attention_variance, s.patches.count(), calibrated);
  }

  out << "wrote " << dataset.scenes.size() << " scenes to " << path.string() << '\n';
  out << std::fixed << std::setprecision(4);
  out << "tier  dial    scenes  mean_H   mean_VarA  mean_C  mean_C(calibrated gamma_a=" << calibrated.gamma_a << ")\n";
  double min_sep = INFINITY;
  double prev = NAN;
  std::size_t index = 0;
  for (auto& [dial, t] : tiers) {
    const double n = static_cast<double>(t.size);
    t.entropy /= n;
    t.attention_variance /= n;
    t.target /= n;
    t.calibrated_target /= n;
    out << std::setw(4) << index++ << "  " << dial << "  " << std::setw(6) << t.size << "  " << t.entropy << "  "
        << std::setprecision(6) << t.attention_variance << std::setprecision(4) << "  " << t.target << "  "
        << t.calibrated_target << '\n';
    if (!std::isnan(prev)) min_sep = std::min(min_sep, t.target - prev);
    prev = t.target;
  }
  if (tiers.size() > 1) out << "min adjacent tier separation of mean C: " << min_sep << '\n';
  out.unsetf(std::ios::floatfield);

  if (!config.dump_csv_path.empty()) {
    const auto csv_path = config.resolve(config.dump_csv_path);
    ensure_parent(csv_path);
    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot open " + csv_path.string());
    write_dataset_csv(csv, dataset, config.train.tau_e, config.train.loss);
  }
  return kExitOk;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  const auto dataset_path = config.resolve(config.dataset_path);
  if (!std::filesystem::exists(dataset_path)) throw IoError("dataset not found: " + dataset_path.string());
  const auto dataset = load_dataset(dataset_path);
  const auto result = train_predictor(dataset, config.train, execution(config));

  const auto ckpt_path = config.resolve(config.checkpoint_path);
  const auto log_path = config.resolve(config.log_path);
  ensure_parent(ckpt_path);
  ensure_parent(log_path);
  save_checkpoint(ckpt_path, result.predictor);
  std::ofstream log(log_path);
  if (!log) throw IoError("cannot open " + log_path.string());
  write_train_log(log, result.log);

  const auto& last = result.log.back();
  out << std::fixed << std::setprecision(4);
  out << "trained " << config.train.steps << " steps on " << dataset.scenes.size() << " scenes (gamma_a "
      << result.gamma_a << ")\n";
  out << "final batch: L_rate " << last.rate_loss << "  L_comp " << last.comp_loss << "  total " << last.total << '\n';
  out << "mean expected count " << result.mean_expected_count << '\n';
  out << "tier  dial    mean_E[k]  mean_K\n";
  const auto& r = result.report;
  for (std::size_t t = 0; t < r.tier_dials.size(); ++t) {
    out << std::setw(4) << t << "  " << r.tier_dials[t] << "  " << r.tier_mean_expected_count[t] << "     "
        << r.tier_mean_inferred_count[t] << '\n';
  }
  out << "monotonic " << (r.monotonic ? "yes" : "no") << '\n';
  out << "checkpoint " << ckpt_path.string() << ", log " << log_path.string() << '\n';
  out.unsetf(std::ios::floatfield);
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& out) {
  if (config.gradcheck.instances == 0) {
    out << "gradcheck: no parameters to check (0 instances requested)\n";
    return kExitOk;
  }
  const auto reports = run_gradient_suite(config.gradcheck);
  bool ok = true;
  out << std::scientific << std::setprecision(3);
  for (const auto& r : reports) {
    out << std::left << std::setw(12) << r.path << std::right << " instances " << r.instances << "  max rel err "
        << r.max_relative_error << "  " << (r.passed ? "PASS" : "FAIL") << '\n';
    ok = ok && r.passed;
  }
  out.unsetf(std::ios::floatfield);
  return ok ? kExitOk : kExitNumeric;
}

int cmd_retention(const RunConfig& config, std::ostream& out) {
  const auto table = BenchmarkTable::load(config.table_path.string());
  bool ok = true;
  out << std::fixed << std::setprecision(2);
  for (const auto& model : table.models()) {
    const auto rows = table.rows_for(model);
    for (const auto& row : rows) out << row.name << ": " << retention(row) << "%\n";
    const double avg = average_retention(rows);
    out << model << " average: " << avg << "%";
    if (const auto published = published_average(model); published && rows.size() == kPublishedBenchmarkCount) {
      const bool match = std::abs(avg - *published) <= kPublishedAverageTolerance;
      ok = ok && match;
      out << std::setprecision(1) << " (published " << *published << ": " << (match ? "ok" : "MISMATCH") << ")"
          << std::setprecision(2);
    }
    out << '\n';
  }
  out.unsetf(std::ios::floatfield);
  return ok ? kExitOk : kExitNumeric;
}

int cmd_allocate(const RunConfig& config, std::ostream& out) {
  const auto ckpt = load_checkpoint(config.resolve(config.checkpoint_path));
  SyntheticDataset dataset;
  if (config.allocate_dial) {
    SceneSpec spec{*config.allocate_dial, config.dataset.n_patches, config.dataset.dim, config.dataset.seed};
    auto [patches, attention] = generate_scene(spec, config.dataset.generator);
    dataset.scenes.push_back(Scene{spec, std::move(patches), std::move(attention)});
  } else {
    dataset = load_dataset(config.resolve(config.dataset_path));
  }
  const CandidateSet& candidates = config.train.candidates;
  if (ckpt.params.out_dim() != candidates.size()) {
    throw VersionError("checkpoint predicts " + std::to_string(ckpt.params.out_dim()) + " counts, candidate set has " +
                       std::to_string(candidates.size()));
  }
  const auto prompt = parse_tokens(config.prompt_template);
  const auto features = extract_features(dataset, config.train.tau_e, execution(config));

  std::ofstream file;
  std::ostream* sink = &out;
  if (!config.allocation_path.empty()) {
    const auto path = config.resolve(config.allocation_path);
    ensure_parent(path);
    file.open(path);
    if (!file) throw IoError("cannot open " + path.string());
    sink = &file;
  }
  std::ostream& csv = *sink;
  csv << std::setprecision(10);
  csv << "scene,dial,entropy,attention_variance";
  for (int k : candidates.counts()) csv << ",pi_" << k;
  csv << ",K,expanded_length\n";
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].assembled.size() != ckpt.params.in_dim()) {
      throw VersionError("checkpoint expects " + std::to_string(ckpt.params.in_dim()) + " features, scene " +
                         std::to_string(i) + " has " + std::to_string(features[i].assembled.size()));
    }
    const RatePolicy policy = predict_policy(ckpt, features[i]);
    const int k = infer_count(policy, candidates);
    csv << i << ',' << dataset.scenes[i].spec.complexity_dial << ',' << features[i].entropy << ','
        << features[i].attention_variance;
    for (double p : policy.probs) csv << ',' << p;
    csv << ',' << k << ',' << expand(prompt, k).size() << '\n';
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  CLI::App app{"Complexity-aware visual token rate prediction: data, training and evaluation tools", "avoco"};
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
  app.require_subcommand(1);

  std::uint64_t seed = 7;
  std::string output_dir = ".", dataset_path = "dataset.avds", checkpoint_path = "predictor.avck",
              log_path = "train_log.csv", table_path = "data/retention_table.csv", dump_csv, allocation_path;
  std::vector<int> candidates{1, 2, 4};
  std::vector<std::size_t> hidden{64, 64};
  double dial = 0.0;

  auto& d = config.dataset;
  auto& t = config.train;
  auto& g = config.gradcheck;
  app.add_option("--seed", seed, "Seed for data, initialisation and batching")->envname("AVOCO_SEED");
  app.add_option("--output-dir", output_dir, "Directory for relative output/input paths")->envname("AVOCO_OUTPUT_DIR");
  app.add_option("--dataset", dataset_path, "Dataset file");
  app.add_option("--checkpoint", checkpoint_path, "Predictor checkpoint file");
  app.add_option("--log", log_path, "Training log CSV");
  app.add_option("--table", table_path, "Benchmark table CSV (model,benchmark,value)");
  app.add_option("--dump-csv", dump_csv, "gen: also write dial,entropy,attention_variance,C rows here");
  app.add_option("--out", allocation_path, "allocate: CSV destination (default stdout)");
  app.add_option("--count", d.count, "gen: number of scenes");
  app.add_option("--tiers", d.tiers, "gen: number of complexity tiers");
  app.add_option("--patches", d.n_patches, "Patches per scene (N)");
  app.add_option("--dim", d.dim, "Patch embedding dimension (d)");
  app.add_option("--base-norm", d.generator.base_norm, "Generator: base patch norm");
  app.add_option("--spread-max", d.generator.spread_max, "Generator: norm spread at dial 0");
  app.add_option("--dominance", d.generator.dominance, "Generator: dominant-patch margin at dial 0");
  app.add_option("--attention-sharpness", d.generator.attention_sharpness, "Generator: attention score scale at dial 1");
  app.add_option("--candidates", candidates, "Candidate token counts")->delimiter(',');
  app.add_option("--tau-e", t.tau_e, "Entropy softmax temperature");
  app.add_option("--tau-start", t.anneal.tau_start, "Initial Gumbel temperature");
  app.add_option("--tau-min", t.anneal.tau_min, "Final Gumbel temperature");
  app.add_option("--alpha", t.loss.alpha, "Entropy weight in the target score");
  app.add_option("--beta", t.loss.beta, "Attention-variance weight in the target score");
  app.add_option("--gamma-a", t.loss.gamma_a, "Attention-variance normaliser (used when calibration is off)");
  app.add_option("--calibrate-gamma", t.calibrate_gamma_a, "Calibrate gamma_a from the dataset (true/false)");
  app.add_option("--standardize", t.standardize_inputs, "Standardise predictor inputs (true/false)");
  app.add_option("--lambda-rate", t.loss.lambda_rate, "Rate loss weight");
  app.add_option("--lambda-comp", t.loss.lambda_comp, "Complexity loss weight");
  app.add_option("--lambda-task", t.loss.lambda_task, "Task proxy weight (0 disables)");
  app.add_option("--hidden", hidden, "Hidden layer widths")->delimiter(',');
  app.add_option("--lr", t.adam.learning_rate, "Learning rate");
  app.add_option("--batch-size", t.batch_size, "Mini-batch size");
  app.add_option("--steps", t.steps, "Training steps");
  app.add_option("--instances", g.instances, "gradcheck: random instances per path");
  app.add_option("--fd-step", g.step, "gradcheck: central-difference step");
  app.add_option("--tolerance", g.tolerance, "gradcheck: max relative error");
  app.add_option("--corrupt", g.corrupt_path, "gradcheck: corrupt this path's analytic gradient (harness test)");
  auto* dial_opt = app.add_option("--dial", dial, "allocate: generate one scene at this complexity dial");
  app.add_option("--template", config.prompt_template, "allocate: prompt with one <ph> placeholder");
  app.add_flag("--serial", config.serial, "Run kernels on the serial reference path");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset")->fallthrough();
  auto* train = app.add_subcommand("train", "Train the rate predictor")->fallthrough();
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient validation")->fallthrough();
  auto* retention_cmd = app.add_subcommand("retention", "Retention report for a benchmark table")->fallthrough();
  auto* allocate = app.add_subcommand("allocate", "Predict token counts with a checkpoint")->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "avoco: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    config.output_dir = output_dir;
    config.dataset_path = dataset_path;
    config.checkpoint_path = checkpoint_path;
    config.log_path = log_path;
    config.table_path = table_path;
    config.dump_csv_path = dump_csv;
    config.allocation_path = allocation_path;
    config.dataset.seed = seed;
    config.train.seed = seed;
    config.gradcheck.seed = seed;
    config.train.candidates = CandidateSet(candidates);
    config.gradcheck.candidates = candidates;
    config.train.hidden = hidden;
    config.gradcheck.hidden = hidden;
    if (dial_opt->count() > 0) config.allocate_dial = dial;
    config.validate();

    if (gen->parsed()) return cmd_gen(config, out);
    if (train->parsed()) return cmd_train(config, out);
    if (gradcheck->parsed()) return cmd_gradcheck(config, out);
    if (retention_cmd->parsed()) return cmd_retention(config, out);
    if (allocate->parsed()) return cmd_allocate(config, out);
    return kExitValidation;
  } catch (const Error& e) {
    err << "avoco: " << e.what() << '\n';
    switch (e.category()) {
      case Error::Category::kValidation: return kExitValidation;
      case Error::Category::kNumeric: return kExitNumeric;
      case Error::Category::kIo: return kExitIo;
    }
  } catch (const std::filesystem::filesystem_error& e) {
    err << "avoco: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "avoco: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitNumeric;
}

}  // namespace avoco
