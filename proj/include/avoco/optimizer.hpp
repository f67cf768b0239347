// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "avoco/mlp.hpp"

namespace avoco {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;
};

/// One bias-corrected adaptive-moment update, in place. `step_index` is
/// 1-based. Moment buffers are allocated on first use.
///
/// Throws NumericError naming the parameter path when a gradient is not
/// finite, ShapeError when gradient shapes differ from the parameters, and
/// ParameterError for a non-positive learning rate or step_index == 0.
void optimizer_step(MlpParams& params, const MlpGradients& grads, double learning_rate, std::size_t step_index,
                    const AdamConfig& config = {});

}  // namespace avoco
