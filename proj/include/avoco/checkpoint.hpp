// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "avoco/mlp.hpp"

namespace avoco {

/// Affine input normalisation x' = (x - shift) * scale, applied before the
/// first layer.
struct InputScaler {
  Vector shift;
  Vector scale;

  /// Per-column mean and inverse standard deviation; constant columns get scale 1.
  static InputScaler fit(std::span<const Vector> rows);
  Vector apply(std::span<const double> x) const;

  friend bool operator==(const InputScaler&, const InputScaler&) = default;
};

struct Checkpoint {
  MlpParams params;
  std::optional<InputScaler> scaler;
};

/// Little-endian layout:
///   "AVCK1" | u8 activation | u32 ndims | u32 dims[ndims] | u8 has_scaler |
///   f64 shift[in] f64 scale[in] (if has_scaler) |
///   per layer: f64 weight[out*in] (row-major), f64 bias[out]
/// Optimizer moments are not stored.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Throws FormatError (with byte offset) on bad magic or truncation.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace avoco
