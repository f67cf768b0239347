// SPDX-License-Identifier: Apache-2.0
#include "avoco/synthetic.hpp"

#include <algorithm>
#include <optional>
#include <cmath>
#include <ostream>
#include <string>

#include "avoco/error.hpp"
#include "avoco/objective.hpp"
#include "avoco/rng.hpp"
#include "byte_io.hpp"

namespace avoco {
namespace {

constexpr std::string_view kMagic = "AVDS1";
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kMaxExtent = 1u << 16;

}  // namespace

void SceneSpec::validate() const {
  if (!(complexity_dial >= 0.0 && complexity_dial <= 1.0)) throw ParameterError("complexity dial must be in [0, 1]");
  if (n_patches < 2) throw ParameterError("a scene needs at least 2 patches");
  if (dim < 1) throw ParameterError("patch dimension must be >= 1");
}

void GeneratorConfig::validate() const {
  if (!(base_norm > 0.0) || !std::isfinite(base_norm)) throw ParameterError("base_norm must be positive");
  if (!(spread_max >= 0.0) || !std::isfinite(spread_max)) throw ParameterError("spread_max must be >= 0");
  if (!(dominance >= 0.0) || !std::isfinite(dominance)) throw ParameterError("dominance must be >= 0");
  if (!(attention_sharpness >= 0.0) || !std::isfinite(attention_sharpness)) {
    throw ParameterError("attention_sharpness must be >= 0");
  }
}

std::pair<PatchSet, AttentionMap> generate_scene(const SceneSpec& spec, const GeneratorConfig& gen) {
  spec.validate();
  gen.validate();
  Rng rng(spec.seed);
  const std::size_t n = spec.n_patches;
  const std::size_t d = spec.dim;
  const double plainness = 1.0 - spec.complexity_dial;

  const double spread = gen.spread_max * plainness;
  Vector norms(n);
  for (double& x : norms) x = gen.base_norm * std::abs(1.0 + spread * rng.normal());
  if (plainness > 0.0) {
    norms[0] = *std::max_element(norms.begin(), norms.end()) + gen.dominance * plainness * gen.base_norm;
  }

  Matrix patches(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = patches.row(i);
    double sq = 0.0;
    for (double& x : row) {
      x = rng.normal();
      sq += x * x;
    }
    const double len = std::sqrt(sq);
    if (len == 0.0) {
      std::fill(row.begin(), row.end(), 0.0);
      row[0] = norms[i];
      continue;
    }
    for (double& x : row) x *= norms[i] / len;
  }

  Matrix attention(n, n);
  const double sharpness = gen.attention_sharpness * spec.complexity_dial;
  Vector scores(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (double& s : scores) s = sharpness * rng.normal();
    const double top = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    auto row = attention.row(r);
    for (std::size_t c = 0; c < n; ++c) {
      row[c] = std::exp(scores[c] - top);
      z += row[c];
    }
    for (double& a : row) a /= z;
  }
  return {PatchSet(std::move(patches)), AttentionMap(std::move(attention))};
}

void DatasetConfig::validate() const {
  if (count < 1) throw ParameterError("dataset count must be >= 1");
  if (tiers < 1) throw ParameterError("dataset needs at least one tier");
  if (!(dial_low >= 0.0 && dial_low <= dial_high && dial_high <= 1.0)) {
    throw ParameterError("dial range must satisfy 0 <= low <= high <= 1");
  }
  SceneSpec{dial_low, n_patches, dim, seed}.validate();
  generator.validate();
}

double scene_dial(const DatasetConfig& config, std::size_t index) {
  const std::size_t tiers = std::min(config.tiers, config.count);
  if (tiers <= 1) return 0.5 * (config.dial_low + config.dial_high);
  const std::size_t tier = index % tiers;
  return config.dial_low +
         (config.dial_high - config.dial_low) * static_cast<double>(tier) / static_cast<double>(tiers - 1);
}

SyntheticDataset build_dataset(const DatasetConfig& config, Execution exec) {
  config.validate();
  std::vector<std::optional<Scene>> slots(config.count);
  for_each_index(config.count, exec, [&](std::size_t i) {
    SceneSpec spec{scene_dial(config, i), config.n_patches, config.dim, derive_seed(config.seed, i)};
    auto [patches, attention] = generate_scene(spec, config.generator);
    slots[i].emplace(Scene{spec, std::move(patches), std::move(attention)});
  });
  SyntheticDataset ds;
  ds.split = config.split;
  ds.scenes.reserve(config.count);
  for (auto& s : slots) ds.scenes.push_back(std::move(*s));
  return ds;
}

std::vector<ComplexityFeatures> extract_features(const SyntheticDataset& dataset, double tau_e, Execution exec) {
  std::vector<ComplexityFeatures> out(dataset.scenes.size());
  for_each_index(dataset.scenes.size(), exec, [&](std::size_t i) {
    const auto& s = dataset.scenes[i];
    out[i] = assemble_features(s.patches, s.attention, tau_e);
  });
  return out;
}

std::vector<std::uint8_t> encode_dataset(const SyntheticDataset& dataset) {
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(dataset.split));
  w.u32(static_cast<std::uint32_t>(dataset.scenes.size()));
  for (const auto& s : dataset.scenes) {
    w.u32(static_cast<std::uint32_t>(s.patches.count()));
    w.u32(static_cast<std::uint32_t>(s.patches.dim()));
    w.u64(s.spec.seed);
    w.f64(s.spec.complexity_dial);
    w.f64s(s.patches.matrix().data());
    w.f64s(s.attention.matrix().data());
  }
  return w.take();
}

SyntheticDataset decode_dataset(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic(kMagic);
  const std::size_t version_offset = r.offset();
  const auto version = r.u8("version");
  if (version != kVersion) {
    throw VersionError("dataset version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kVersion) + ", byte offset " + std::to_string(version_offset) + ")");
  }
  const std::size_t split_offset = r.offset();
  const auto split = r.u8("split");
  if (split > 1) throw FormatError("unknown split tag", split_offset);
  SyntheticDataset ds;
  ds.split = static_cast<Split>(split);
  const auto count = r.u32("scene count");
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::size_t scene_offset = r.offset();
    SceneSpec spec;
    spec.n_patches = r.u32("patch count");
    spec.dim = r.u32("patch dimension");
    spec.seed = r.u64("scene seed");
    spec.complexity_dial = r.f64("dial");
    try {
      spec.validate();
    } catch (const ParameterError& e) {
      throw FormatError(std::string("invalid scene header: ") + e.what(), scene_offset);
    }
    if (spec.n_patches > kMaxExtent || spec.dim > kMaxExtent) {
      throw FormatError("implausible scene dimensions", scene_offset);
    }
    const std::size_t need = (spec.n_patches * spec.dim + spec.n_patches * spec.n_patches) * 8;
    if (r.remaining() < need) {
      throw FormatError("truncated input while reading scene " + std::to_string(k), r.offset());
    }
    const std::size_t body_offset = r.offset();
    Matrix patches(spec.n_patches, spec.dim);
    Matrix attention(spec.n_patches, spec.n_patches);
    r.f64s(patches.data(), "patches");
    r.f64s(attention.data(), "attention");
    try {
      ds.scenes.push_back(Scene{spec, PatchSet(std::move(patches)), AttentionMap(std::move(attention))});
    } catch (const Error& e) {
      throw FormatError(std::string("invalid scene payload: ") + e.what(), body_offset);
    }
  }
  if (!r.at_end()) throw FormatError("trailing bytes after dataset", r.offset());
  return ds;
}

void save_dataset(const std::filesystem::path& path, const SyntheticDataset& dataset) {
  detail::write_file(path, encode_dataset(dataset));
}

SyntheticDataset load_dataset(const std::filesystem::path& path) { return decode_dataset(detail::read_file(path)); }

void write_dataset_csv(std::ostream& out, const SyntheticDataset& dataset, double tau_e, const LossConfig& loss) {
  const auto features = extract_features(dataset, tau_e);
  const auto old_precision = out.precision(17);
  out << "dial,entropy,attention_variance,C\n";
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    out << dataset.scenes[i].spec.complexity_dial << ',' << f.entropy << ',' << f.attention_variance << ','
        << target_complexity(f.entropy, f.attention_variance, dataset.scenes[i].patches.count(), loss) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace avoco
