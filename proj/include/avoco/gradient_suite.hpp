// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace avoco {

/// Finite-difference validation of every differentiable path:
/// "mlp", "log_softmax", "gumbel", "rate_loss", "comp_loss", "joint".
struct GradientSuiteOptions {
  std::size_t instances = 20;
  double step = 1e-5;
  double tolerance = 1e-5;
  std::uint64_t seed = 7;
  std::size_t patch_dim = 8;
  std::vector<std::size_t> hidden = {64, 64};
  std::vector<int> candidates = {1, 2, 4};
  std::size_t batch_size = 4;
  /// Test hook: perturb the analytic gradient of this path.
  std::string corrupt_path;
};

struct PathReport {
  std::string path;
  std::size_t instances = 0;
  double max_relative_error = 0.0;
  bool passed = true;
};

std::vector<PathReport> run_gradient_suite(const GradientSuiteOptions& options);

inline const std::vector<std::string>& gradient_paths() {
  static const std::vector<std::string> paths = {"mlp", "log_softmax", "gumbel", "rate_loss", "comp_loss", "joint"};
  return paths;
}

}  // namespace avoco
