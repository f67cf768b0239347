// SPDX-License-Identifier: Apache-2.0
#include "avoco/checkpoint.hpp"

#include <cmath>
#include <string>

#include "avoco/error.hpp"
#include "byte_io.hpp"

namespace avoco {
namespace {

constexpr std::string_view kMagic = "AVCK1";
constexpr std::uint32_t kMaxLayerWidth = 1u << 20;
constexpr std::uint32_t kMaxDims = 64;

}  // namespace

InputScaler InputScaler::fit(std::span<const Vector> rows) {
  if (rows.empty()) throw ParameterError("InputScaler::fit needs at least one row");
  const std::size_t n = rows.front().size();
  InputScaler s{Vector(n, 0.0), Vector(n, 1.0)};
  for (const auto& r : rows) {
    if (r.size() != n) throw ShapeError("InputScaler::fit: ragged rows");
    for (std::size_t j = 0; j < n; ++j) s.shift[j] += r[j];
  }
  const double count = static_cast<double>(rows.size());
  for (double& m : s.shift) m /= count;
  Vector var(n, 0.0);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < n; ++j) var[j] += (r[j] - s.shift[j]) * (r[j] - s.shift[j]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double sd = std::sqrt(var[j] / count);
    s.scale[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  return s;
}

Vector InputScaler::apply(std::span<const double> x) const {
  if (x.size() != shift.size()) throw ShapeError("InputScaler::apply: length mismatch");
  Vector y(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) y[j] = (x[j] - shift[j]) * scale[j];
  return y;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  const auto dims = ckpt.params.dims();
  if (dims.empty()) throw ShapeError("cannot checkpoint an empty network");
  if (ckpt.scaler && (ckpt.scaler->shift.size() != dims.front() || ckpt.scaler->scale.size() != dims.front())) {
    throw ShapeError("checkpoint scaler does not match the network input width");
  }
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u8(static_cast<std::uint8_t>(ckpt.params.hidden_activation));
  w.u32(static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) w.u32(static_cast<std::uint32_t>(d));
  w.u8(ckpt.scaler ? 1 : 0);
  if (ckpt.scaler) {
    w.f64s(ckpt.scaler->shift);
    w.f64s(ckpt.scaler->scale);
  }
  for (const auto& layer : ckpt.params.layers) {
    w.f64s(layer.weight.data());
    w.f64s(layer.bias);
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic(kMagic);
  const std::size_t act_offset = r.offset();
  const auto act = r.u8("activation");
  if (act > static_cast<std::uint8_t>(Activation::kTanh)) throw FormatError("unknown activation tag", act_offset);
  const std::size_t ndims_offset = r.offset();
  const auto ndims = r.u32("layer count");
  if (ndims < 2 || ndims > kMaxDims) throw FormatError("implausible layer count", ndims_offset);
  std::vector<std::size_t> dims;
  for (std::uint32_t i = 0; i < ndims; ++i) {
    const std::size_t off = r.offset();
    const auto d = r.u32("layer width");
    if (d == 0 || d > kMaxLayerWidth) throw FormatError("implausible layer width", off);
    dims.push_back(d);
  }
  Checkpoint ckpt;
  ckpt.params = make_zero_mlp(dims, static_cast<Activation>(act));
  const std::size_t flag_offset = r.offset();
  const auto has_scaler = r.u8("scaler flag");
  if (has_scaler > 1) throw FormatError("bad scaler flag", flag_offset);
  if (has_scaler == 1) {
    InputScaler s{Vector(dims.front()), Vector(dims.front())};
    r.f64s(s.shift, "scaler shift");
    r.f64s(s.scale, "scaler scale");
    ckpt.scaler = std::move(s);
  }
  for (auto& layer : ckpt.params.layers) {
    r.f64s(layer.weight.data(), "weights");
    r.f64s(layer.bias, "biases");
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint", r.offset());
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  detail::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(detail::read_file(path)); }

}  // namespace avoco
