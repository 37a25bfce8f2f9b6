#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace mvf::ingest {

// Dense optical flow in pixels. Entries flagged invalid hold u = v = 0.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> u, v;
  std::vector<uint8_t> valid;  // 1 = known flow

  FlowField() = default;
  FlowField(int w, int h);

  std::size_t size() const { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  bool operator==(const FlowField&) const = default;
};

inline constexpr float kFloMagic = 202021.25f;
// Components with magnitude above this mark unknown flow.
inline constexpr float kFloUnknownThreshold = 1e9f;

FlowField parse_flo(std::span<const uint8_t> bytes);
FlowField read_flo(const std::filesystem::path& path);
// Invalid pixels are written as 1e10 in both components.
std::vector<uint8_t> serialize_flo(const FlowField& flow);
void write_flo(const std::filesystem::path& path, const FlowField& flow);

}  // namespace mvf::ingest
