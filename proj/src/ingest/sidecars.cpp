#include "mvf/ingest/sidecars.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "json.hpp"
#include "mvf/error.hpp"
#include "mvf/ingest/fileio.hpp"

namespace mvf::ingest {

namespace {

using nlohmann::json;

template <typename Fn>
void for_each_line(std::string_view text, Fn fn) {
  std::size_t line = 0;
  while (!text.empty()) {
    ++line;
    const std::size_t end = text.find('\n');
    std::string_view row = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.find_first_not_of(" \t") == std::string_view::npos) continue;
    json obj = json::parse(row.begin(), row.end(), nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw FormatError("line " + std::to_string(line) + ": not a JSON object");
    fn(obj, line);
  }
}

int int_field(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) {
    throw FormatError("line " + std::to_string(line) + ": integer \"" + key + "\" required");
  }
  const int64_t v = it->get<int64_t>();
  if (v < -(int64_t{1} << 30) || v > (int64_t{1} << 30)) throw FormatError("line " + std::to_string(line) + ": \"" + key + "\" out of range");
  return static_cast<int>(v);
}

std::string string_field(const json& obj, const char* key, std::size_t line, bool required) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw FormatError("line " + std::to_string(line) + ": string \"" + key + "\" required");
    return {};
  }
  if (!it->is_string()) throw FormatError("line " + std::to_string(line) + ": \"" + key + "\" must be a string");
  return it->get<std::string>();
}

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string relative_to(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty()) return {};
  if (base.empty()) return p.generic_string();
  auto rel = p.lexically_relative(base);
  if (rel.empty() || *rel.begin() == "..") return p.generic_string();
  return rel.generic_string();
}

}  // namespace

std::vector<FaceBox> parse_boxes(std::string_view text) {
  std::vector<FaceBox> boxes;
  for_each_line(text, [&](const json& obj, std::size_t line) {
    FaceBox b{int_field(obj, "frame_index", line), int_field(obj, "x", line), int_field(obj, "y", line),
              int_field(obj, "w", line), int_field(obj, "h", line)};
    if (b.w <= 0 || b.h <= 0) throw FormatError("line " + std::to_string(line) + ": box must have positive w and h");
    if (b.frame_index < 0) throw FormatError("line " + std::to_string(line) + ": negative frame_index");
    boxes.push_back(b);
  });
  std::stable_sort(boxes.begin(), boxes.end(), [](const FaceBox& a, const FaceBox& b) { return a.frame_index < b.frame_index; });
  for (std::size_t i = 1; i < boxes.size(); ++i) {
    if (boxes[i].frame_index == boxes[i - 1].frame_index) {
      throw FormatError("two boxes for frame " + std::to_string(boxes[i].frame_index));
    }
  }
  return boxes;
}

std::vector<FaceBox> read_boxes(const std::filesystem::path& path) { return parse_boxes(read_file_text(path)); }

std::string serialize_boxes(const std::vector<FaceBox>& boxes) {
  std::string out;
  for (const FaceBox& b : boxes) {
    out += "{\"frame_index\":" + std::to_string(b.frame_index) + ",\"x\":" + std::to_string(b.x) + ",\"y\":" +
           std::to_string(b.y) + ",\"w\":" + std::to_string(b.w) + ",\"h\":" + std::to_string(b.h) + "}\n";
  }
  return out;
}

void write_boxes(const std::filesystem::path& path, const std::vector<FaceBox>& boxes) {
  write_file_text(path, serialize_boxes(boxes));
}

std::optional<FaceBox> box_for_frame(const std::vector<FaceBox>& boxes, int frame_index) {
  if (boxes.empty()) return std::nullopt;
  auto it = std::upper_bound(boxes.begin(), boxes.end(), frame_index,
                             [](int index, const FaceBox& b) { return index < b.frame_index; });
  return it == boxes.begin() ? boxes.front() : *std::prev(it);
}

std::string_view forgery_code(ForgeryType type) {
  switch (type) {
    case ForgeryType::kDeepFakes: return "DF";
    case ForgeryType::kFace2Face: return "F2F";
    case ForgeryType::kFaceShifter: return "FS";
    case ForgeryType::kFaceSwap: return "FSwap";
    case ForgeryType::kNeuralTextures: return "NT";
    case ForgeryType::kPristine: return "Pristine";
  }
  return "?";
}

std::string_view forgery_name(ForgeryType type) {
  switch (type) {
    case ForgeryType::kDeepFakes: return "DeepFakes";
    case ForgeryType::kFace2Face: return "Face2Face";
    case ForgeryType::kFaceShifter: return "FaceShifter";
    case ForgeryType::kFaceSwap: return "FaceSwap";
    case ForgeryType::kNeuralTextures: return "NeuralTextures";
    case ForgeryType::kPristine: return "Pristine";
  }
  return "?";
}

ForgeryType parse_forgery(std::string_view code) {
  for (ForgeryType t : {ForgeryType::kDeepFakes, ForgeryType::kFace2Face, ForgeryType::kFaceShifter,
                        ForgeryType::kFaceSwap, ForgeryType::kNeuralTextures, ForgeryType::kPristine}) {
    if (code == forgery_code(t) || code == forgery_name(t)) return t;
  }
  throw FormatError("unknown forgery type \"" + std::string(code) + "\"");
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    if (name == split_name(s)) return s;
  }
  throw FormatError("unknown split \"" + std::string(name) + "\"");
}

std::vector<const ManifestEntry*> DatasetManifest::select(Split split) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  DatasetManifest manifest;
  std::map<std::string, Split> seen;
  for_each_line(text, [&](const json& obj, std::size_t line) {
    const std::string where = "line " + std::to_string(line) + ": ";
    ManifestEntry e;
    e.video_id = string_field(obj, "video_id", line, true);
    if (e.video_id.empty()) throw FormatError(where + "empty video_id");
    const std::string label = string_field(obj, "label", line, true);
    if (label == "real") {
      e.label = Label::kReal;
    } else if (label == "fake") {
      e.label = Label::kFake;
    } else {
      throw FormatError(where + "label must be \"real\" or \"fake\"");
    }
    try {
      e.forgery = parse_forgery(string_field(obj, "forgery", line, true));
      e.split = parse_split(string_field(obj, "split", line, true));
    } catch (const FormatError& err) {
      throw FormatError(where + err.what());
    }
    if ((e.label == Label::kReal) != (e.forgery == ForgeryType::kPristine)) {
      throw FormatError(where + "label contradicts forgery type");
    }
    e.stream = resolve(string_field(obj, "stream", line, false), base_dir);
    e.frames = resolve(string_field(obj, "frames", line, false), base_dir);
    e.boxes = resolve(string_field(obj, "boxes", line, false), base_dir);
    e.dump = resolve(string_field(obj, "dump", line, false), base_dir);
    e.fields = resolve(string_field(obj, "fields", line, false), base_dir);
    auto [it, inserted] = seen.emplace(e.video_id, e.split);
    if (!inserted) {
      throw FormatError(where + "video \"" + e.video_id + "\" already listed" +
                        (it->second != e.split ? " in split " + std::string(split_name(it->second)) + " (splits overlap)" : ""));
    }
    manifest.entries.push_back(std::move(e));
  });
  return manifest;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file_text(path), path.parent_path());
}

std::string serialize_manifest(const DatasetManifest& manifest, const std::filesystem::path& base_dir) {
  std::string out;
  for (const ManifestEntry& e : manifest.entries) {
    json obj = json::object();
    obj["video_id"] = e.video_id;
    obj["label"] = e.label == Label::kReal ? "real" : "fake";
    obj["forgery"] = std::string(forgery_code(e.forgery));
    obj["split"] = std::string(split_name(e.split));
    const std::pair<const char*, const std::filesystem::path*> paths[] = {
        {"stream", &e.stream}, {"frames", &e.frames}, {"boxes", &e.boxes}, {"dump", &e.dump}, {"fields", &e.fields}};
    for (const auto& [key, p] : paths) {
      if (!p->empty()) obj[key] = relative_to(*p, base_dir);
    }
    out += obj.dump() + "\n";
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  write_file_text(path, serialize_manifest(manifest, path.parent_path()));
}

}  // namespace mvf::ingest
