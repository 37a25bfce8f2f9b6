#include "mvf/ingest/mvdump.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "mvf/error.hpp"
#include "mvf/ingest/fileio.hpp"

namespace mvf::ingest {

namespace {

using nlohmann::json;

bool valid_size(int v) { return v == 4 || v == 8 || v == 16; }

int get_int(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError("line " + std::to_string(line) + ": missing \"" + key + "\"");
  if (!it->is_number_integer()) throw FormatError("line " + std::to_string(line) + ": \"" + key + "\" is not an integer");
  const int64_t v = it->get<int64_t>();
  if (v < -(int64_t{1} << 30) || v > (int64_t{1} << 30)) {
    throw FormatError("line " + std::to_string(line) + ": \"" + key + "\" out of range");
  }
  return static_cast<int>(v);
}

MvDumpRecord parse_record(std::string_view text, std::size_t line) {
  json obj = json::parse(text.begin(), text.end(), nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) throw FormatError("line " + std::to_string(line) + ": not a JSON object");
  MvDumpRecord r;
  r.frame_index = get_int(obj, "frame_index", line);
  auto dir = obj.find("direction");
  if (dir == obj.end() || !dir->is_string()) throw FormatError("line " + std::to_string(line) + ": missing \"direction\"");
  const std::string& d = dir->get_ref<const std::string&>();
  if (d == "past") {
    r.direction = MvDirection::kPast;
  } else if (d == "future") {
    r.direction = MvDirection::kFuture;
  } else {
    throw FormatError("line " + std::to_string(line) + ": direction must be \"past\" or \"future\"");
  }
  r.x0 = get_int(obj, "x0", line);
  r.y0 = get_int(obj, "y0", line);
  r.w = get_int(obj, "w", line);
  r.h = get_int(obj, "h", line);
  r.mv_x_qpel = get_int(obj, "mv_x_qpel", line);
  r.mv_y_qpel = get_int(obj, "mv_y_qpel", line);
  r.ref_offset = get_int(obj, "ref_offset", line);
  const std::string where = "line " + std::to_string(line) + ": ";
  if (r.frame_index < 0) throw FormatError(where + "negative frame_index");
  if (!valid_size(r.w) || !valid_size(r.h)) throw FormatError(where + "partition size must be 4, 8 or 16");
  if (r.x0 < 0 || r.y0 < 0) throw FormatError(where + "negative partition offset");
  if (r.ref_offset == 0 || r.ref_offset < -16 || r.ref_offset > 16) throw FormatError(where + "ref_offset must be in [-16,-1] or [1,16]");
  if ((r.ref_offset < 0) != (r.direction == MvDirection::kPast)) throw FormatError(where + "ref_offset sign contradicts direction");
  return r;
}

}  // namespace

MvDump parse_mvdump(std::string_view text) {
  std::map<int, std::vector<MvDumpRecord>> frames;
  std::size_t line = 0;
  while (!text.empty()) {
    ++line;
    const std::size_t end = text.find('\n');
    std::string_view row = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.find_first_not_of(" \t") == std::string_view::npos) continue;
    MvDumpRecord r = parse_record(row, line);
    frames[r.frame_index].push_back(r);
  }
  MvDump dump;
  dump.reserve(frames.size());
  for (auto& [index, records] : frames) dump.push_back(MvDumpFrame{index, std::move(records)});
  return dump;
}

MvDump read_mvdump(const std::filesystem::path& path) { return parse_mvdump(read_file_text(path)); }

void write_mvdump(std::ostream& out, const MvDump& dump) {
  for (const MvDumpFrame& frame : dump) {
    for (const MvDumpRecord& r : frame.records) {
      out << "{\"frame_index\":" << r.frame_index << ",\"direction\":\""
          << (r.direction == MvDirection::kPast ? "past" : "future") << "\",\"x0\":" << r.x0 << ",\"y0\":" << r.y0
          << ",\"w\":" << r.w << ",\"h\":" << r.h << ",\"mv_x_qpel\":" << r.mv_x_qpel << ",\"mv_y_qpel\":" << r.mv_y_qpel
          << ",\"ref_offset\":" << r.ref_offset << "}\n";
    }
  }
}

void write_mvdump(const std::filesystem::path& path, const MvDump& dump) {
  std::ostringstream out;
  write_mvdump(out, dump);
  write_file_text(path, out.str());
}

MvDump mvdump_from_stream(const bitparse::ParsedStream& stream) {
  MvDump dump;
  for (const bitparse::ParsedFrame& frame : stream.frames) {
    MvDumpFrame out{frame.index, {}};
    for (const bitparse::MacroblockRecord& mb : frame.macroblocks) {
      for (const bitparse::PartitionMv& p : mb.partitions) {
        out.records.push_back(MvDumpRecord{frame.index, p.direction, p.x0, p.y0, p.w, p.h, p.mv_x, p.mv_y, p.ref_offset});
      }
    }
    if (!out.records.empty()) dump.push_back(std::move(out));
  }
  return dump;
}

bitparse::PartitionMv to_partition(const MvDumpRecord& r) {
  return bitparse::PartitionMv{r.x0, r.y0, r.w, r.h, r.mv_x_qpel, r.mv_y_qpel, r.ref_offset, r.direction};
}

}  // namespace mvf::ingest
