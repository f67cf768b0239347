// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>

#include "avoco/matrix.hpp"

namespace avoco {

inline constexpr double kDefaultEntropyTemperature = 1.0;

/// N patch embeddings of dimension d, one per row. N >= 1, d >= 1, finite.
class PatchSet {
 public:
  explicit PatchSet(Matrix patches);

  const Matrix& matrix() const noexcept { return patches_; }
  std::size_t count() const noexcept { return patches_.rows(); }
  std::size_t dim() const noexcept { return patches_.cols(); }

  friend bool operator==(const PatchSet&, const PatchSet&) = default;

 private:
  Matrix patches_;
};

/// Row-stochastic N×N self-attention map. Entries must be non-negative and
/// every row must sum to 1 within kRowSumTolerance; anything else is rejected
/// with ParameterError rather than renormalised.
class AttentionMap {
 public:
  static constexpr double kRowSumTolerance = 1e-9;

  explicit AttentionMap(Matrix weights);

  const Matrix& matrix() const noexcept { return weights_; }
  std::size_t size() const noexcept { return weights_.rows(); }

  friend bool operator==(const AttentionMap&, const AttentionMap&) = default;

 private:
  Matrix weights_;
};

/// Element-wise mean of several heads. A single head is returned unchanged.
AttentionMap reduce_heads(std::span<const AttentionMap> heads);

struct MeanVariance {
  Vector mean;
  Vector variance;
};

/// Per-dimension mean and population variance over the N patches.
MeanVariance patch_mean_variance(const PatchSet& patches);

/// Shannon entropy (nats) of softmax(||p_i||_2 / tau_e). Result is in [0, log N].
double patch_entropy(const PatchSet& patches, double tau_e = kDefaultEntropyTemperature);

/// Population variance over all N^2 entries.
double attention_variance(const AttentionMap& map);

struct ComplexityFeatures {
  Vector mean;
  Vector variance;
  double entropy = 0.0;
  double attention_variance = 0.0;
  /// [mean | variance | entropy | attention_variance], length 2d + 2.
  Vector assembled;

  std::size_t patch_dim() const noexcept { return mean.size(); }
};

ComplexityFeatures assemble_features(const PatchSet& patches, const AttentionMap& map,
                                     double tau_e = kDefaultEntropyTemperature);

}  // namespace avoco
