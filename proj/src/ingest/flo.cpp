#include "mvf/ingest/flo.hpp"

#include <cmath>

#include "mvf/error.hpp"
#include "mvf/ingest/binary.hpp"
#include "mvf/ingest/fileio.hpp"

namespace mvf::ingest {

FlowField::FlowField(int w, int h) : width(w), height(h), u(size(), 0.0f), v(size(), 0.0f), valid(size(), 1) {}

FlowField parse_flo(std::span<const uint8_t> bytes) {
  ByteReader in(bytes);
  if (in.f32() != kFloMagic) throw BadMagic("not a .flo file (magic 202021.25 expected)");
  const int32_t w = in.i32();
  const int32_t h = in.i32();
  if (w <= 0 || h <= 0 || w > 1 << 16 || h > 1 << 16) throw FormatError("flo dimensions " + std::to_string(w) + "x" + std::to_string(h) + " out of range");
  const uint64_t values = uint64_t{static_cast<uint32_t>(w)} * static_cast<uint32_t>(h) * 2;
  if (values * 4 > in.remaining()) throw TruncatedFile("flo payload shorter than " + std::to_string(w) + "x" + std::to_string(h));
  FlowField flow(w, h);
  for (std::size_t i = 0; i < flow.size(); ++i) {
    const float u = in.f32();
    const float v = in.f32();
    if (std::isnan(u) || std::isnan(v)) throw FormatError("NaN flow at pixel " + std::to_string(i));
    if (std::abs(u) > kFloUnknownThreshold || std::abs(v) > kFloUnknownThreshold) {
      flow.valid[i] = 0;
    } else {
      flow.u[i] = u;
      flow.v[i] = v;
    }
  }
  return flow;
}

FlowField read_flo(const std::filesystem::path& path) { return parse_flo(read_file_bytes(path)); }

std::vector<uint8_t> serialize_flo(const FlowField& flow) {
  if (flow.width <= 0 || flow.height <= 0 || flow.u.size() != flow.size() || flow.v.size() != flow.size() ||
      flow.valid.size() != flow.size()) {
    throw FormatError("inconsistent flow field");
  }
  ByteWriter out;
  out.f32(kFloMagic);
  out.i32(flow.width);
  out.i32(flow.height);
  for (std::size_t i = 0; i < flow.size(); ++i) {
    out.f32(flow.valid[i] ? flow.u[i] : 1e10f);
    out.f32(flow.valid[i] ? flow.v[i] : 1e10f);
  }
  return out.data();
}

void write_flo(const std::filesystem::path& path, const FlowField& flow) {
  auto bytes = serialize_flo(flow);
  write_file_bytes(path, bytes.data(), bytes.size());
}

}  // namespace mvf::ingest
