// SPDX-License-Identifier: Apache-2.0
#include "avoco/mlp.hpp"

#include <cmath>
#include <string>

#include "avoco/error.hpp"

namespace avoco {
namespace {

void check_dims(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw ParameterError("an MLP needs at least input and output widths");
  for (std::size_t w : dims) {
    if (w == 0) throw ParameterError("MLP layer widths must be positive");
  }
}

double activate(Activation a, double x) { return a == Activation::kTanh ? std::tanh(x) : x; }

// Derivative expressed through the activation output y.
double activate_derivative(Activation a, double y) { return a == Activation::kTanh ? 1.0 - y * y : 1.0; }

}  // namespace

std::size_t MlpParams::in_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }

std::size_t MlpParams::out_dim() const { return layers.empty() ? 0 : layers.back().weight.rows(); }

std::vector<std::size_t> MlpParams::dims() const {
  std::vector<std::size_t> d;
  if (layers.empty()) return d;
  d.push_back(in_dim());
  for (const auto& l : layers) d.push_back(l.weight.rows());
  return d;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<std::size_t> default_mlp_dims(std::size_t in_dim, std::size_t out_dim) { return {in_dim, 64, 64, out_dim}; }

MlpParams make_zero_mlp(std::span<const std::size_t> dims, Activation hidden) {
  check_dims(dims);
  MlpParams p;
  p.hidden_activation = hidden;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    p.layers.push_back({Matrix(dims[l + 1], dims[l]), Vector(dims[l + 1], 0.0)});
  }
  return p;
}

MlpParams make_mlp(std::span<const std::size_t> dims, Rng& rng, Activation hidden) {
  MlpParams p = make_zero_mlp(dims, hidden);
  for (auto& layer : p.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
    for (double& w : layer.weight.data()) w = rng.uniform(-limit, limit);
  }
  return p;
}

MlpForward mlp_forward(const MlpParams& params, std::span<const double> input) {
  if (params.layers.empty()) throw ShapeError("mlp_forward on an empty network");
  if (input.size() != params.in_dim()) {
    throw ShapeError("mlp_forward: input length " + std::to_string(input.size()) + ", network expects " +
                     std::to_string(params.in_dim()));
  }
  MlpForward fwd;
  fwd.cache.dims = params.dims();
  fwd.cache.revision = params.revision;
  fwd.cache.activations.reserve(params.layers.size() + 1);
  fwd.cache.activations.emplace_back(input.begin(), input.end());

  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    Vector z = matvec(layer.weight, fwd.cache.activations.back());
    const bool hidden = l + 1 < params.layers.size();
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] += layer.bias[i];
      if (hidden) z[i] = activate(params.hidden_activation, z[i]);
    }
    fwd.cache.activations.push_back(std::move(z));
  }
  fwd.output = fwd.cache.activations.back();
  return fwd;
}

MlpGradients mlp_backward(const MlpParams& params, const MlpCache& cache, std::span<const double> output_gradient) {
  if (cache.dims != params.dims() || cache.activations.size() != params.layers.size() + 1) {
    throw UsageError("mlp_backward: cache was produced by a different architecture");
  }
  if (cache.revision != params.revision) {
    throw UsageError("mlp_backward: cache is stale (revision " + std::to_string(cache.revision) + ", params at " +
                     std::to_string(params.revision) + ")");
  }
  if (output_gradient.size() != params.out_dim()) throw ShapeError("mlp_backward: output gradient length mismatch");

  MlpGradients g = zero_gradients(params);
  Vector delta(output_gradient.begin(), output_gradient.end());
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const auto& layer = params.layers[l];
    add_outer(g.layers[l].weight, delta, cache.activations[l]);
    for (std::size_t i = 0; i < delta.size(); ++i) g.layers[l].bias[i] = delta[i];
    Vector upstream = matvec_transposed(layer.weight, delta);
    if (l > 0) {
      const auto& y = cache.activations[l];
      for (std::size_t i = 0; i < upstream.size(); ++i) {
        upstream[i] *= activate_derivative(params.hidden_activation, y[i]);
      }
    }
    delta = std::move(upstream);
  }
  g.input = std::move(delta);
  return g;
}

MlpGradients zero_gradients(const MlpParams& params) {
  MlpGradients g;
  g.layers.reserve(params.layers.size());
  for (const auto& l : params.layers) {
    g.layers.push_back({Matrix(l.weight.rows(), l.weight.cols()), Vector(l.bias.size(), 0.0)});
  }
  g.input.assign(params.in_dim(), 0.0);
  return g;
}

void accumulate(MlpGradients& into, const MlpGradients& g, double scale) {
  if (into.layers.size() != g.layers.size()) throw ShapeError("accumulate: layer count mismatch");
  for (std::size_t l = 0; l < g.layers.size(); ++l) {
    auto dst = into.layers[l].weight.data();
    const auto src = g.layers[l].weight.data();
    if (dst.size() != src.size() || into.layers[l].bias.size() != g.layers[l].bias.size()) {
      throw ShapeError("accumulate: layer shape mismatch");
    }
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += scale * src[i];
    for (std::size_t i = 0; i < g.layers[l].bias.size(); ++i) into.layers[l].bias[i] += scale * g.layers[l].bias[i];
  }
}

Vector flatten_parameters(const MlpParams& params) {
  Vector flat;
  flat.reserve(params.parameter_count());
  for (const auto& l : params.layers) {
    flat.insert(flat.end(), l.weight.data().begin(), l.weight.data().end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void assign_parameters(MlpParams& params, std::span<const double> flat) {
  if (flat.size() != params.parameter_count()) throw ShapeError("assign_parameters: wrong parameter count");
  std::size_t k = 0;
  for (auto& l : params.layers) {
    for (double& w : l.weight.data()) w = flat[k++];
    for (double& b : l.bias) b = flat[k++];
  }
}

Vector flatten_gradients(const MlpGradients& grads) {
  Vector flat;
  for (const auto& l : grads.layers) {
    flat.insert(flat.end(), l.weight.data().begin(), l.weight.data().end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

std::string parameter_path(const MlpParams& params, std::size_t index) {
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    if (index < layer.weight.size()) {
      return "layers[" + std::to_string(l) + "].weight(" + std::to_string(index / layer.weight.cols()) + "," +
             std::to_string(index % layer.weight.cols()) + ")";
    }
    index -= layer.weight.size();
    if (index < layer.bias.size()) return "layers[" + std::to_string(l) + "].bias(" + std::to_string(index) + ")";
    index -= layer.bias.size();
  }
  return "<out of range>";
}

}  // namespace avoco
