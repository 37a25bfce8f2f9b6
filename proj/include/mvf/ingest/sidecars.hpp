#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mvf::ingest {

struct FaceBox {
  int frame_index = 0;
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const FaceBox&) const = default;
};

// JSON lines {"frame_index","x","y","w","h"}; result sorted by frame index.
// Non-positive sizes and duplicate frame indices are FormatError.
std::vector<FaceBox> parse_boxes(std::string_view text);
std::vector<FaceBox> read_boxes(const std::filesystem::path& path);
std::string serialize_boxes(const std::vector<FaceBox>& boxes);
void write_boxes(const std::filesystem::path& path, const std::vector<FaceBox>& boxes);

// Box of the given frame, or of the nearest earlier frame that has one, or of
// the first frame if none is earlier. Empty when the list is empty.
std::optional<FaceBox> box_for_frame(const std::vector<FaceBox>& boxes, int frame_index);

enum class Label { kReal, kFake };
enum class ForgeryType { kDeepFakes, kFace2Face, kFaceShifter, kFaceSwap, kNeuralTextures, kPristine };
enum class Split { kTrain, kVal, kTest };

inline constexpr ForgeryType kForgeryTypes[] = {ForgeryType::kDeepFakes, ForgeryType::kFace2Face,
                                                ForgeryType::kFaceShifter, ForgeryType::kFaceSwap,
                                                ForgeryType::kNeuralTextures};

// Manifest codes: DF, F2F, FS, FSwap, NT, Pristine.
std::string_view forgery_code(ForgeryType type);
// Display names: DeepFakes, Face2Face, FaceShifter, FaceSwap, NeuralTextures, Pristine.
std::string_view forgery_name(ForgeryType type);
ForgeryType parse_forgery(std::string_view code);
std::string_view split_name(Split split);
Split parse_split(std::string_view name);

struct ManifestEntry {
  std::string video_id;
  Label label = Label::kReal;
  ForgeryType forgery = ForgeryType::kPristine;
  Split split = Split::kTrain;
  // Optional inputs; relative paths are resolved against the manifest's
  // directory when read from disk.
  std::filesystem::path stream;
  std::filesystem::path frames;
  std::filesystem::path boxes;
  std::filesystem::path dump;
  std::filesystem::path fields;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> select(Split split) const;
  bool operator==(const DatasetManifest&) const = default;
};

// JSON lines, one entry each. Duplicate video ids (in particular across
// splits) and labels contradicting the forgery type are FormatError.
DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});
DatasetManifest read_manifest(const std::filesystem::path& path);
// Paths are written relative to base_dir when they lie below it.
std::string serialize_manifest(const DatasetManifest& manifest, const std::filesystem::path& base_dir = {});
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

}  // namespace mvf::ingest
