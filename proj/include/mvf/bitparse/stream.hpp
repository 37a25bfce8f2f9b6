#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mvf/bitparse/macroblock.hpp"
#include "mvf/bitparse/params.hpp"
#include "mvf/error.hpp"

namespace mvf::bitparse {

enum class FrameType { kI, kP, kB, kUnknown };

const char* frame_type_name(FrameType type);

// Decoder-visible picture geometry.
struct FrameGeometry {
  int coded_width = 0;
  int coded_height = 0;
  FrameCropping crop;

  int width() const { return coded_width - crop.left - crop.right; }
  int height() const { return coded_height - crop.top - crop.bottom; }
  bool operator==(const FrameGeometry&) const = default;
};

// A slice that could not be decoded. The parser skips it and continues.
struct SliceIssue {
  int frame_index = -1;  // -1 when the slice could not be attributed to a frame
  std::size_t stream_offset = 0;
  ErrorKind kind = ErrorKind::kMalformedSlice;
  std::string message;
};

struct ParsedFrame {
  int index = 0;  // decode order, equal to display order for I/P streams
  FrameType type = FrameType::kUnknown;
  bool idr = false;
  uint32_t frame_num = 0;
  FrameGeometry geometry;
  // One record per macroblock in raster order. Macroblocks no slice covered
  // (skipped slices) appear as intra records.
  std::vector<MacroblockRecord> macroblocks;
  int undecoded_macroblocks = 0;
};

struct ParsedStream {
  std::vector<ParsedFrame> frames;
  std::vector<SliceIssue> issues;
};

// Parses a complete Annex-B stream. Throws only for stream-level framing
// errors (TruncatedStream, including an empty input; corrupt NAL header); per-slice problems land in
// `issues`.
ParsedStream parse_stream(std::span<const uint8_t> bytes);

}  // namespace mvf::bitparse
