#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mvf/pipeline/pipeline.hpp"

namespace mvf::pipeline {

// Preprocessed samples of one video.
struct SampleCache {
  PreprocessConfig config;
  std::vector<int> frame_indices;
  std::vector<SampleTensor> samples;

  bool operator==(const SampleCache&) const = default;
};

// Binary .mvs layout, little-endian:
//   "MVSAMPLE" | u32 version (1) | u8 modality | i32 input_res | u8 past_only
//   | u32 sample count
//   per sample: i32 frame_index | u32 channels | i32 height | i32 width
//               | per channel: u8 kind, i32 mask_of, u8 degenerate
//               | channels*height*width f32
std::vector<uint8_t> serialize_samples(const SampleCache& cache);
SampleCache parse_samples(std::span<const uint8_t> bytes);
void write_samples(const std::filesystem::path& path, const SampleCache& cache);
SampleCache read_samples(const std::filesystem::path& path);

}  // namespace mvf::pipeline
