// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "avoco/matrix.hpp"
#include "avoco/rng.hpp"

namespace avoco {

enum class Activation : std::uint8_t { kLinear = 0, kTanh = 1 };

/// y = W x + b, W is (out × in).
struct DenseLayer {
  Matrix weight;
  Vector bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// First and second moment buffers for one layer; same shapes as the layer.
struct LayerMoments {
  Matrix weight_m, weight_v;
  Vector bias_m, bias_v;

  friend bool operator==(const LayerMoments&, const LayerMoments&) = default;
};

/// Weights of a fully connected network. Hidden layers use
/// `hidden_activation`; the output layer is always linear (it emits logits).
struct MlpParams {
  std::vector<DenseLayer> layers;
  Activation hidden_activation = Activation::kTanh;
  std::vector<LayerMoments> moments;
  /// Bumped by every optimizer step; forward caches remember it.
  std::uint64_t revision = 0;

  std::size_t in_dim() const;
  std::size_t out_dim() const;
  /// Layer widths: {in, h1, ..., out}.
  std::vector<std::size_t> dims() const;
  std::size_t parameter_count() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Default rate-predictor architecture: in -> 64 -> 64 -> out.
std::vector<std::size_t> default_mlp_dims(std::size_t in_dim, std::size_t out_dim);

/// All-zero network. Throws ParameterError for fewer than two dims or a zero width.
MlpParams make_zero_mlp(std::span<const std::size_t> dims, Activation hidden = Activation::kTanh);

/// Glorot-uniform weights in ±sqrt(6/(fan_in+fan_out)), zero biases.
MlpParams make_mlp(std::span<const std::size_t> dims, Rng& rng, Activation hidden = Activation::kTanh);

/// Everything the backward pass needs from a forward call.
struct MlpCache {
  /// activations[0] is the input, activations[l+1] the output of layer l.
  std::vector<Vector> activations;
  std::vector<std::size_t> dims;
  std::uint64_t revision = 0;
};

struct MlpForward {
  Vector output;
  MlpCache cache;
};

struct MlpGradients {
  std::vector<DenseLayer> layers;
  Vector input;
};

MlpForward mlp_forward(const MlpParams& params, std::span<const double> input);

/// Exact reverse-mode pass. Throws UsageError when `cache` was produced by a
/// different architecture or an older revision of `params`.
MlpGradients mlp_backward(const MlpParams& params, const MlpCache& cache, std::span<const double> output_gradient);

/// Zero gradients shaped like `params` (input gradient sized in_dim).
MlpGradients zero_gradients(const MlpParams& params);

/// into += scale * g (parameter part only).
void accumulate(MlpGradients& into, const MlpGradients& g, double scale = 1.0);

/// Parameters in declaration order: per layer, weight row-major then bias.
Vector flatten_parameters(const MlpParams& params);
void assign_parameters(MlpParams& params, std::span<const double> flat);
Vector flatten_gradients(const MlpGradients& grads);

/// Human-readable location of flat parameter `index`, e.g. "layers[1].weight(3,4)".
std::string parameter_path(const MlpParams& params, std::size_t index);

}  // namespace avoco
