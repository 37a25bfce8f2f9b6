#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mvf/bitparse/stream.hpp"
#include "mvf/ingest/mvdump.hpp"
#include "mvf/motionfield/motionfield.hpp"

namespace mvf::ingest {

struct FieldFrame {
  int frame_index = 0;
  bitparse::FrameType type = bitparse::FrameType::kUnknown;
  motionfield::MotionField field;

  bool operator==(const FieldFrame&) const = default;
};

// Motion fields of one video.
struct FieldSequence {
  int width = 0;  // visible frame size in pixels
  int height = 0;
  std::vector<FieldFrame> frames;

  bool operator==(const FieldSequence&) const = default;
};

// Binary .mvf layout, little-endian:
//   "MVFIELDS" | u32 version (1) | i32 width | i32 height | u32 frame count
//   per frame: i32 frame_index | u8 type (0 I, 1 P, 2 B, 3 unknown)
//              | i32 grid_w | i32 grid_h | 6 planes of grid_w*grid_h f32
//   plane order: past_x, past_y, future_x, future_y, im_past, im_future
std::vector<uint8_t> serialize_fields(const FieldSequence& seq);
FieldSequence parse_fields(std::span<const uint8_t> bytes);
void write_fields(const std::filesystem::path& path, const FieldSequence& seq);
FieldSequence read_fields(const std::filesystem::path& path);

// Rasterized fields of every parsed frame, computed on up to `threads`
// workers. Frames must share one geometry.
FieldSequence fields_from_stream(const bitparse::ParsedStream& stream, int threads = 1);

// Rasterized fields from an MV dump for frames 0 .. frame_count-1 (extended to
// cover the last dumped frame). Dump frames carry no picture type: a frame with
// any future-directed record is B, any other frame with records is P, and a
// frame without records is I.
FieldSequence fields_from_dump(const MvDump& dump, int width, int height, int frame_count);

}  // namespace mvf::ingest
