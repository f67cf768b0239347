// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "avoco/features.hpp"
#include "avoco/parallel.hpp"

namespace avoco {

struct LossConfig;

/// Recipe for one synthetic scene. complexity_dial in [0, 1], N >= 2, d >= 1.
struct SceneSpec {
  double complexity_dial = 0.5;
  std::size_t n_patches = 64;
  std::size_t dim = 32;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

/// Generator constants. Patch norms are base * |1 + spread * z| with
/// spread = spread_max * (1 - dial); patch 0 is pushed dominance * (1 - dial) * base
/// above the largest norm. Attention rows are softmax(sharpness * dial * z).
struct GeneratorConfig {
  double base_norm = 1.0;
  double spread_max = 3.0;
  double dominance = 5.0;
  double attention_sharpness = 4.0;

  void validate() const;
  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

struct Scene {
  SceneSpec spec;
  PatchSet patches;
  AttentionMap attention;

  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Deterministic in spec.seed. Throws ParameterError for an invalid spec.
std::pair<PatchSet, AttentionMap> generate_scene(const SceneSpec& spec, const GeneratorConfig& generator = {});

enum class Split : std::uint8_t { kTrain = 0, kVal = 1 };

struct DatasetConfig {
  std::size_t count = 300;
  /// Dials form a uniform grid of `tiers` points over [dial_low, dial_high];
  /// scene i lands in tier i mod tiers. One effective tier means the midpoint.
  std::size_t tiers = 3;
  double dial_low = 0.0;
  double dial_high = 1.0;
  std::size_t n_patches = 64;
  std::size_t dim = 32;
  std::uint64_t seed = 7;
  Split split = Split::kTrain;
  GeneratorConfig generator;

  void validate() const;
};

struct SyntheticDataset {
  Split split = Split::kTrain;
  std::vector<Scene> scenes;

  friend bool operator==(const SyntheticDataset&, const SyntheticDataset&) = default;
};

/// Dial assigned to scene `index`.
double scene_dial(const DatasetConfig& config, std::size_t index);

SyntheticDataset build_dataset(const DatasetConfig& config, Execution exec = Execution::kParallel);

/// Features for every scene, in scene order.
std::vector<ComplexityFeatures> extract_features(const SyntheticDataset& dataset, double tau_e,
                                                 Execution exec = Execution::kParallel);

/// Little-endian layout:
///   "AVDS1" | u8 version (=1) | u8 split | u32 scene_count |
///   per scene: u32 N | u32 d | u64 seed | f64 dial | f64 patches[N*d] | f64 attention[N*N]
std::vector<std::uint8_t> encode_dataset(const SyntheticDataset& dataset);
/// Throws FormatError with byte offset on truncation or bad magic and
/// VersionError on an unknown version byte.
SyntheticDataset decode_dataset(std::span<const std::uint8_t> bytes);

void save_dataset(const std::filesystem::path& path, const SyntheticDataset& dataset);
SyntheticDataset load_dataset(const std::filesystem::path& path);

/// CSV rows "dial,entropy,attention_variance,C" for inspection.
void write_dataset_csv(std::ostream& out, const SyntheticDataset& dataset, double tau_e, const LossConfig& loss);

}  // namespace avoco
