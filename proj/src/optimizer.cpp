// SPDX-License-Identifier: Apache-2.0
#include "avoco/optimizer.hpp"

#include <cmath>
#include <string>

#include "avoco/error.hpp"

namespace avoco {
namespace {

void ensure_moments(MlpParams& params) {
  if (params.moments.size() == params.layers.size()) return;
  params.moments.clear();
  for (const auto& l : params.layers) {
    const auto rows = l.weight.rows();
    const auto cols = l.weight.cols();
    params.moments.push_back({Matrix(rows, cols), Matrix(rows, cols), Vector(rows, 0.0), Vector(rows, 0.0)});
  }
}

void update(std::span<double> theta, std::span<const double> grad, std::span<double> m, std::span<double> v,
            double lr, double c1, double c2, const AdamConfig& cfg) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    theta[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

}  // namespace

void optimizer_step(MlpParams& params, const MlpGradients& grads, double learning_rate, std::size_t step_index,
                    const AdamConfig& config) {
  if (!(learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
  if (step_index == 0) throw ParameterError("optimizer step_index is 1-based");
  if (grads.layers.size() != params.layers.size()) throw ShapeError("optimizer_step: layer count mismatch");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    if (grads.layers[l].weight.rows() != params.layers[l].weight.rows() ||
        grads.layers[l].weight.cols() != params.layers[l].weight.cols() ||
        grads.layers[l].bias.size() != params.layers[l].bias.size()) {
      throw ShapeError("optimizer_step: gradient shape mismatch at layer " + std::to_string(l));
    }
  }
  const Vector flat = flatten_gradients(grads);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (!std::isfinite(flat[i])) throw NumericError("non-finite gradient at " + parameter_path(params, i));
  }

  ensure_moments(params);
  const double t = static_cast<double>(step_index);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& layer = params.layers[l];
    auto& mom = params.moments[l];
    update(layer.weight.data(), grads.layers[l].weight.data(), mom.weight_m.data(), mom.weight_v.data(),
           learning_rate, c1, c2, config);
    update(layer.bias, grads.layers[l].bias, mom.bias_m, mom.bias_v, learning_rate, c1, c2, config);
  }
  ++params.revision;
}

}  // namespace avoco
