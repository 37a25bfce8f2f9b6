#pragma once

#include <array>
#include <span>
#include <vector>

#include "mvf/bitparse/macroblock.hpp"
#include "mvf/bitparse/stream.hpp"
#include "mvf/image.hpp"

namespace mvf::motionfield {

// Dense motion at 4x4-pixel granularity over the decoder-visible (cropped)
// frame. Motion planes are in pixels; IM planes are 0 or 1. All planes are
// row-major grid_h x grid_w.
struct MotionField {
  int grid_w = 0;
  int grid_h = 0;
  std::vector<float> past_x, past_y, future_x, future_y;
  std::vector<float> im_past, im_future;

  MotionField() = default;
  MotionField(int w, int h);

  std::size_t cells() const { return static_cast<std::size_t>(grid_w) * grid_h; }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * grid_w + x; }
  // Order used by every serialization: past_x, past_y, future_x, future_y,
  // im_past, im_future.
  std::array<std::vector<float>*, 6> plane_list() { return {&past_x, &past_y, &future_x, &future_y, &im_past, &im_future}; }
  std::array<const std::vector<float>*, 6> plane_list() const {
    return {&past_x, &past_y, &future_x, &future_y, &im_past, &im_future};
  }
  // IM = 0 implies zero motion in the matching channels.
  bool consistent() const;

  bool operator==(const MotionField&) const = default;
};

// Per-cell signed reference distance; 0 where no motion is present.
struct RefOffsetGrid {
  int grid_w = 0;
  int grid_h = 0;
  std::vector<int> past;
  std::vector<int> future;
};

int grid_cells(int pixels);

// Geometry of a width x height picture coded in whole macroblocks and cropped
// at the right and bottom, as an encoder would produce it.
bitparse::FrameGeometry display_geometry(int width, int height);

// Rasterizes a full picture. `records` must hold every macroblock of the coded
// frame exactly once and every inter macroblock must be tiled by its
// partitions; otherwise GeometryError. Intra macroblocks clear both IMs.
MotionField rasterize(std::span<const bitparse::MacroblockRecord> records, const bitparse::FrameGeometry& geometry,
                      RefOffsetGrid* offsets = nullptr);

MotionField rasterize(const bitparse::ParsedFrame& frame, RefOffsetGrid* offsets = nullptr);

// Rasterizes loose partitions (the MV dump path). Uncovered cells count as
// intra; overlapping partitions of the same direction raise GeometryError.
MotionField rasterize_partitions(std::span<const bitparse::PartitionMv> partitions,
                                 const bitparse::FrameGeometry& geometry, RefOffsetGrid* offsets = nullptr);

MotionField select_past_only(const MotionField& field);

// Divides every vector by the magnitude of its reference distance.
MotionField temporal_scale(const MotionField& field, const RefOffsetGrid& offsets);

struct FlowColorOptions {
  bool future = false;       // render the future channel instead of past
  float max_magnitude = 0;   // saturation reference; 0 = field maximum
  int cell_pixels = 4;
};

// Flow color wheel: hue from direction, saturation from magnitude, full value.
// Cells without motion information are black.
RgbImage render_flow(const MotionField& field, const FlowColorOptions& options = {});

}  // namespace mvf::motionfield
