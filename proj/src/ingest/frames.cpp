#include "mvf/ingest/frames.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>

#include "mvf/error.hpp"
#include "mvf/ingest/fileio.hpp"

namespace mvf::ingest {

namespace {

class PpmHeader {
 public:
  explicit PpmHeader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  int next_int() {
    skip_space();
    if (pos_ >= bytes_.size() || bytes_[pos_] < '0' || bytes_[pos_] > '9') throw FormatError("PPM header: number expected");
    int64_t v = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1 << 20) throw FormatError("PPM header: value too large");
    }
    return static_cast<int>(v);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) throw FormatError("PPM header: whitespace expected after maxval");
    return pos_ + 1;
  }

 private:
  static bool is_space(uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

RgbImage parse_ppm(std::span<const uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw BadMagic("not a binary PPM (P6)");
  PpmHeader header(bytes);
  const int w = header.next_int();
  const int h = header.next_int();
  const int maxval = header.next_int();
  if (w <= 0 || h <= 0 || w > 1 << 15 || h > 1 << 15) throw FormatError("PPM dimensions out of range");
  if (maxval != 255) throw FormatError("only 8-bit PPM (maxval 255) is supported");
  const std::size_t start = header.raster_start();
  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() - start < need) throw TruncatedFile("PPM raster shorter than " + std::to_string(w) + "x" + std::to_string(h));
  RgbImage img(w, h);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(start), need, img.pixels.begin());
  return img;
}

RgbImage read_ppm(const std::filesystem::path& path) { return parse_ppm(read_file_bytes(path)); }

std::vector<uint8_t> serialize_ppm(const RgbImage& image) {
  if (image.width <= 0 || image.height <= 0 || image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw FormatError("inconsistent image");
  }
  const std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  auto bytes = serialize_ppm(image);
  write_file_bytes(path, bytes.data(), bytes.size());
}

std::filesystem::path frame_path(const std::filesystem::path& dir, int index, const char* extension) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d%s", index, extension);
  return dir / name;
}

FrameSequence read_frames(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::map<int, std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string stem = entry.path().stem().string();
    if (entry.path().extension() != ".ppm" || stem.size() != 6 ||
        !std::all_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      continue;
    }
    files[std::stoi(stem)] = entry.path();
  }
  FrameSequence seq;
  if (files.empty()) return seq;
  seq.first_index = files.begin()->first;
  int expected = seq.first_index;
  for (const auto& [index, path] : files) {
    if (index != expected) throw MissingFrame("frame " + std::to_string(expected) + " missing in " + dir.string());
    seq.frames.push_back(read_ppm(path));
    if (seq.frames.back().width != seq.frames.front().width || seq.frames.back().height != seq.frames.front().height) {
      throw FormatError("frame " + std::to_string(index) + " size differs from frame " + std::to_string(seq.first_index));
    }
    ++expected;
  }
  return seq;
}

}  // namespace mvf::ingest
