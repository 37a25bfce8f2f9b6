#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "mvf/bitparse/macroblock.hpp"
#include "mvf/bitparse/stream.hpp"

namespace mvf::ingest {

using bitparse::MvDirection;

// One partition's motion as carried by an MV dump sidecar. Same semantics as
// bitparse::PartitionMv.
struct MvDumpRecord {
  int frame_index = 0;
  MvDirection direction = MvDirection::kPast;
  int x0 = 0;
  int y0 = 0;
  int w = 16;
  int h = 16;
  int mv_x_qpel = 0;
  int mv_y_qpel = 0;
  int ref_offset = -1;

  bool operator==(const MvDumpRecord&) const = default;
};

struct MvDumpFrame {
  int frame_index = 0;
  std::vector<MvDumpRecord> records;

  bool operator==(const MvDumpFrame&) const = default;
};

// Frames in ascending frame_index order; frames without records are absent.
using MvDump = std::vector<MvDumpFrame>;

MvDump parse_mvdump(std::string_view text);
MvDump read_mvdump(const std::filesystem::path& path);

void write_mvdump(std::ostream& out, const MvDump& dump);
void write_mvdump(const std::filesystem::path& path, const MvDump& dump);

MvDump mvdump_from_stream(const bitparse::ParsedStream& stream);

bitparse::PartitionMv to_partition(const MvDumpRecord& record);

}  // namespace mvf::ingest
