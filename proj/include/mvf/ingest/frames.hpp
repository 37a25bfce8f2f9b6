#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mvf/image.hpp"

namespace mvf::ingest {

// Binary PPM (P6), maxval 255.
RgbImage parse_ppm(std::span<const uint8_t> bytes);
RgbImage read_ppm(const std::filesystem::path& path);
std::vector<uint8_t> serialize_ppm(const RgbImage& image);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

struct FrameSequence {
  int first_index = 0;
  std::vector<RgbImage> frames;
};

// Reads every %06d.ppm file of a directory. Indices must be contiguous from
// the smallest one present (MissingFrame otherwise) and all frames must share
// one size (FormatError).
FrameSequence read_frames(const std::filesystem::path& dir);

std::filesystem::path frame_path(const std::filesystem::path& dir, int index, const char* extension = ".ppm");

}  // namespace mvf::ingest
