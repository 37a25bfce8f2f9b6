#include "mvf/ingest/fields.hpp"

#include <algorithm>

#include "mvf/error.hpp"
#include "mvf/parallel.hpp"
#include "mvf/ingest/binary.hpp"
#include "mvf/ingest/fileio.hpp"

namespace mvf::ingest {

namespace {

constexpr std::string_view kMagic = "MVFIELDS";
constexpr uint32_t kVersion = 1;

}  // namespace

std::vector<uint8_t> serialize_fields(const FieldSequence& seq) {
  ByteWriter out;
  out.bytes(kMagic);
  out.u32(kVersion);
  out.i32(seq.width);
  out.i32(seq.height);
  out.u32(static_cast<uint32_t>(seq.frames.size()));
  for (const FieldFrame& f : seq.frames) {
    out.i32(f.frame_index);
    out.u8(static_cast<uint8_t>(f.type));
    out.i32(f.field.grid_w);
    out.i32(f.field.grid_h);
    for (const auto* plane : f.field.plane_list()) {
      if (plane->size() != f.field.cells()) throw FormatError("motion field plane size mismatch");
      out.f32s(*plane);
    }
  }
  return out.data();
}

FieldSequence parse_fields(std::span<const uint8_t> bytes) {
  ByteReader in(bytes);
  if (bytes.size() < kMagic.size() || in.bytes(kMagic.size()) != kMagic) throw BadMagic("not a motion field file");
  const uint32_t version = in.u32();
  if (version != kVersion) throw FormatError("unsupported motion field version " + std::to_string(version));
  FieldSequence seq;
  seq.width = in.i32();
  seq.height = in.i32();
  if (seq.width <= 0 || seq.height <= 0 || seq.width > 1 << 15 || seq.height > 1 << 15) {
    throw FormatError("frame size out of range");
  }
  const uint32_t count = in.u32();
  const int gw = motionfield::grid_cells(seq.width);
  const int gh = motionfield::grid_cells(seq.height);
  const std::size_t frame_bytes = 13 + std::size_t{6} * 4 * static_cast<std::size_t>(gw) * gh;
  if (count > in.remaining() / frame_bytes) throw TruncatedFile("frame count exceeds file size");
  for (uint32_t i = 0; i < count; ++i) {
    FieldFrame f;
    f.frame_index = in.i32();
    const uint8_t type = in.u8();
    if (type > 3) throw FormatError("bad frame type code " + std::to_string(type));
    f.type = static_cast<bitparse::FrameType>(type);
    const int32_t w = in.i32();
    const int32_t h = in.i32();
    if (w != gw || h != gh) throw FormatError("frame " + std::to_string(i) + " grid does not match the frame size");
    f.field = motionfield::MotionField(w, h);
    for (auto* plane : f.field.plane_list()) in.f32s(*plane);
    if (!f.field.consistent()) throw FormatError("frame " + std::to_string(i) + " violates the mask invariant");
    seq.frames.push_back(std::move(f));
  }
  if (in.remaining() != 0) throw FormatError("trailing bytes after the last frame");
  return seq;
}

void write_fields(const std::filesystem::path& path, const FieldSequence& seq) {
  auto bytes = serialize_fields(seq);
  write_file_bytes(path, bytes.data(), bytes.size());
}

FieldSequence read_fields(const std::filesystem::path& path) { return parse_fields(read_file_bytes(path)); }

FieldSequence fields_from_stream(const bitparse::ParsedStream& stream, int threads) {
  FieldSequence seq;
  if (stream.frames.empty()) return seq;
  const bitparse::FrameGeometry& g = stream.frames.front().geometry;
  seq.width = g.width();
  seq.height = g.height();
  for (const bitparse::ParsedFrame& frame : stream.frames) {
    if (!(frame.geometry == g)) throw GeometryError("frame " + std::to_string(frame.index) + " changes the picture size");
  }
  seq.frames.resize(stream.frames.size());
  parallel_for(stream.frames.size(), threads, [&](int, std::size_t i) {
    const bitparse::ParsedFrame& frame = stream.frames[i];
    seq.frames[i] = FieldFrame{frame.index, frame.type, motionfield::rasterize(frame)};
  });
  return seq;
}

FieldSequence fields_from_dump(const MvDump& dump, int width, int height, int frame_count) {
  if (width <= 0 || height <= 0) throw GeometryError("frame size must be positive");
  if (!dump.empty()) frame_count = std::max(frame_count, dump.back().frame_index + 1);
  const bitparse::FrameGeometry geometry = motionfield::display_geometry(width, height);
  FieldSequence seq{width, height, {}};
  std::size_t next = 0;
  for (int index = 0; index < frame_count; ++index) {
    FieldFrame f{index, bitparse::FrameType::kI, motionfield::MotionField(motionfield::grid_cells(width), motionfield::grid_cells(height))};
    if (next < dump.size() && dump[next].frame_index == index) {
      std::vector<bitparse::PartitionMv> parts;
      bool future = false;
      for (const MvDumpRecord& r : dump[next].records) {
        parts.push_back(to_partition(r));
        future = future || r.direction == MvDirection::kFuture;
      }
      if (!parts.empty()) {
        f.type = future ? bitparse::FrameType::kB : bitparse::FrameType::kP;
        f.field = motionfield::rasterize_partitions(parts, geometry);
      }
      ++next;
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

}  // namespace mvf::ingest
