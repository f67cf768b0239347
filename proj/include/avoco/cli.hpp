// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "avoco/gradient_suite.hpp"
#include "avoco/synthetic.hpp"
#include "avoco/trainer.hpp"

namespace avoco {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumeric = 2, kExitIo = 3 };

/// Every knob of every subcommand.
struct RunConfig {
  DatasetConfig dataset;
  TrainConfig train;
  GradientSuiteOptions gradcheck;

  std::filesystem::path output_dir = ".";
  std::filesystem::path dataset_path = "dataset.avds";
  std::filesystem::path checkpoint_path = "predictor.avck";
  std::filesystem::path log_path = "train_log.csv";
  std::filesystem::path table_path = "data/retention_table.csv";
  std::filesystem::path dump_csv_path;  // empty: no dump
  std::filesystem::path allocation_path;  // empty: stdout
  std::optional<double> allocate_dial;  // set: allocate a single generated scene
  std::string prompt_template = "USER : <image> <ph> describe this scene . ASSISTANT :";
  bool serial = false;

  /// Throws ParameterError / StructureError for the first invalid setting.
  void validate() const;
  /// output_dir / p for relative p.
  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

int cmd_gen(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_gradcheck(const RunConfig& config, std::ostream& out);
int cmd_retention(const RunConfig& config, std::ostream& out);
int cmd_allocate(const RunConfig& config, std::ostream& out);

/// Parses `args` (without the program name), validates, dispatches, and maps
/// library errors to exit codes. Config file values are overridden by flags.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace avoco
