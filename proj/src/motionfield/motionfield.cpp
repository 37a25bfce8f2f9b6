#include "mvf/motionfield/motionfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mvf/error.hpp"

namespace mvf::motionfield {

using bitparse::FrameGeometry;
using bitparse::MacroblockRecord;
using bitparse::MbKind;
using bitparse::MvDirection;
using bitparse::PartitionMv;

MotionField::MotionField(int w, int h) : grid_w(w), grid_h(h) {
  for (auto* plane : plane_list()) plane->assign(cells(), 0.0f);
}

bool MotionField::consistent() const {
  for (const auto* plane : plane_list()) {
    if (plane->size() != cells()) return false;
  }
  for (std::size_t i = 0; i < cells(); ++i) {
    if (im_past[i] != 0.0f && im_past[i] != 1.0f) return false;
    if (im_future[i] != 0.0f && im_future[i] != 1.0f) return false;
    if (im_past[i] == 0.0f && (past_x[i] != 0.0f || past_y[i] != 0.0f)) return false;
    if (im_future[i] == 0.0f && (future_x[i] != 0.0f || future_y[i] != 0.0f)) return false;
  }
  return true;
}

int grid_cells(int pixels) { return (pixels + 3) / 4; }

FrameGeometry display_geometry(int width, int height) {
  if (width <= 0 || height <= 0) throw GeometryError("frame dimensions must be positive");
  FrameGeometry g;
  g.coded_width = (width + 15) / 16 * 16;
  g.coded_height = (height + 15) / 16 * 16;
  g.crop.right = g.coded_width - width;
  g.crop.bottom = g.coded_height - height;
  return g;
}

namespace {

// Motion painted on the coded-frame 4x4 grid.
class CodedCanvas {
 public:
  explicit CodedCanvas(const FrameGeometry& g) : geometry_(g) {
    if (g.coded_width <= 0 || g.coded_height <= 0 || g.coded_width % 16 != 0 || g.coded_height % 16 != 0) {
      throw GeometryError("coded frame must be whole macroblocks");
    }
    const auto& c = g.crop;
    if (c.left < 0 || c.right < 0 || c.top < 0 || c.bottom < 0 || g.width() <= 0 || g.height() <= 0) {
      throw GeometryError("cropping leaves no visible picture");
    }
    w_ = g.coded_width / 4;
    h_ = g.coded_height / 4;
    for (auto& c : cells_) c.resize(static_cast<std::size_t>(w_) * h_);
  }

  void paint(const PartitionMv& p) {
    if (p.x0 < 0 || p.y0 < 0 || p.x0 % 4 != 0 || p.y0 % 4 != 0 || p.w <= 0 || p.h <= 0 || p.w % 4 != 0 ||
        p.h % 4 != 0 || p.x0 + p.w > geometry_.coded_width || p.y0 + p.h > geometry_.coded_height) {
      throw GeometryError("partition " + describe(p) + " does not fit the 4x4 grid of the frame");
    }
    auto& plane = cells_[p.direction == MvDirection::kPast ? 0 : 1];
    for (int y = p.y0 / 4; y < (p.y0 + p.h) / 4; ++y) {
      for (int x = p.x0 / 4; x < (p.x0 + p.w) / 4; ++x) {
        Cell& c = plane[static_cast<std::size_t>(y) * w_ + x];
        if (c.covered) throw GeometryError("partitions overlap at pixel (" + std::to_string(4 * x) + "," + std::to_string(4 * y) + ")");
        c = Cell{true, p.mv_x, p.mv_y, p.ref_offset};
      }
    }
  }

  bool covered(int x, int y) const {
    const std::size_t i = static_cast<std::size_t>(y) * w_ + x;
    return cells_[0][i].covered || cells_[1][i].covered;
  }

  MotionField crop(RefOffsetGrid* offsets) const {
    const int gw = grid_cells(geometry_.width());
    const int gh = grid_cells(geometry_.height());
    MotionField f(gw, gh);
    if (offsets != nullptr) *offsets = RefOffsetGrid{gw, gh, std::vector<int>(f.cells()), std::vector<int>(f.cells())};
    for (int j = 0; j < gh; ++j) {
      for (int i = 0; i < gw; ++i) {
        const int cx = (geometry_.crop.left + 4 * i) / 4;
        const int cy = (geometry_.crop.top + 4 * j) / 4;
        const std::size_t src = static_cast<std::size_t>(cy) * w_ + cx;
        const std::size_t dst = f.index(i, j);
        if (const Cell& c = cells_[0][src]; c.covered) {
          f.past_x[dst] = static_cast<float>(c.mv_x) / 4.0f;
          f.past_y[dst] = static_cast<float>(c.mv_y) / 4.0f;
          f.im_past[dst] = 1.0f;
          if (offsets != nullptr) offsets->past[dst] = c.ref_offset;
        }
        if (const Cell& c = cells_[1][src]; c.covered) {
          f.future_x[dst] = static_cast<float>(c.mv_x) / 4.0f;
          f.future_y[dst] = static_cast<float>(c.mv_y) / 4.0f;
          f.im_future[dst] = 1.0f;
          if (offsets != nullptr) offsets->future[dst] = c.ref_offset;
        }
      }
    }
    return f;
  }

 private:
  struct Cell {
    bool covered = false;
    int mv_x = 0;
    int mv_y = 0;
    int ref_offset = 0;
  };

  static std::string describe(const PartitionMv& p) {
    return std::to_string(p.w) + "x" + std::to_string(p.h) + "@(" + std::to_string(p.x0) + "," + std::to_string(p.y0) + ")";
  }

  FrameGeometry geometry_;
  int w_ = 0;
  int h_ = 0;
  std::array<std::vector<Cell>, 2> cells_;
};

}  // namespace

MotionField rasterize(std::span<const MacroblockRecord> records, const FrameGeometry& geometry, RefOffsetGrid* offsets) {
  CodedCanvas canvas(geometry);
  const int width_mbs = geometry.coded_width / 16;
  const int total = width_mbs * (geometry.coded_height / 16);
  std::vector<bool> seen(static_cast<std::size_t>(total), false);
  for (const MacroblockRecord& mb : records) {
    if (mb.mb_addr < 0 || mb.mb_addr >= total) throw GeometryError("mb_addr " + std::to_string(mb.mb_addr) + " outside the frame");
    if (seen[static_cast<std::size_t>(mb.mb_addr)]) throw GeometryError("macroblock " + std::to_string(mb.mb_addr) + " appears twice");
    seen[static_cast<std::size_t>(mb.mb_addr)] = true;
    if ((mb.kind == MbKind::kIntra) != mb.partitions.empty()) {
      throw GeometryError("macroblock " + std::to_string(mb.mb_addr) + ": partitions must be empty exactly for intra");
    }
    const int mx = (mb.mb_addr % width_mbs) * 16;
    const int my = (mb.mb_addr / width_mbs) * 16;
    for (const PartitionMv& p : mb.partitions) {
      if (p.x0 < mx || p.y0 < my || p.x0 + p.w > mx + 16 || p.y0 + p.h > my + 16) {
        throw GeometryError("partition leaves macroblock " + std::to_string(mb.mb_addr));
      }
      canvas.paint(p);
    }
    if (mb.kind != MbKind::kIntra) {
      for (int y = my / 4; y < my / 4 + 4; ++y) {
        for (int x = mx / 4; x < mx / 4 + 4; ++x) {
          if (!canvas.covered(x, y)) throw GeometryError("partitions of macroblock " + std::to_string(mb.mb_addr) + " leave a gap");
        }
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw GeometryError("records do not cover every macroblock");
  return canvas.crop(offsets);
}

MotionField rasterize(const bitparse::ParsedFrame& frame, RefOffsetGrid* offsets) {
  return rasterize(frame.macroblocks, frame.geometry, offsets);
}

MotionField rasterize_partitions(std::span<const PartitionMv> partitions, const FrameGeometry& geometry,
                                 RefOffsetGrid* offsets) {
  CodedCanvas canvas(geometry);
  for (const PartitionMv& p : partitions) canvas.paint(p);
  return canvas.crop(offsets);
}

MotionField select_past_only(const MotionField& field) {
  MotionField out = field;
  std::fill(out.future_x.begin(), out.future_x.end(), 0.0f);
  std::fill(out.future_y.begin(), out.future_y.end(), 0.0f);
  std::fill(out.im_future.begin(), out.im_future.end(), 0.0f);
  return out;
}

MotionField temporal_scale(const MotionField& field, const RefOffsetGrid& offsets) {
  if (offsets.grid_w != field.grid_w || offsets.grid_h != field.grid_h || offsets.past.size() != field.cells() ||
      offsets.future.size() != field.cells()) {
    throw GeometryError("reference offset grid does not match the field");
  }
  MotionField out = field;
  for (std::size_t i = 0; i < field.cells(); ++i) {
    if (field.im_past[i] != 0.0f && offsets.past[i] != 0) {
      const float d = static_cast<float>(std::abs(offsets.past[i]));
      out.past_x[i] /= d;
      out.past_y[i] /= d;
    }
    if (field.im_future[i] != 0.0f && offsets.future[i] != 0) {
      const float d = static_cast<float>(std::abs(offsets.future[i]));
      out.future_x[i] /= d;
      out.future_y[i] /= d;
    }
  }
  return out;
}

namespace {

void hsv_to_rgb(double h, double s, double v, uint8_t* rgb) {
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = v - c;
  rgb[0] = static_cast<uint8_t>(std::lround((r + m) * 255.0));
  rgb[1] = static_cast<uint8_t>(std::lround((g + m) * 255.0));
  rgb[2] = static_cast<uint8_t>(std::lround((b + m) * 255.0));
}

}  // namespace

RgbImage render_flow(const MotionField& field, const FlowColorOptions& options) {
  const auto& ux = options.future ? field.future_x : field.past_x;
  const auto& uy = options.future ? field.future_y : field.past_y;
  const auto& im = options.future ? field.im_future : field.im_past;
  double max_mag = options.max_magnitude;
  if (max_mag <= 0) {
    for (std::size_t i = 0; i < field.cells(); ++i) max_mag = std::max(max_mag, std::hypot(double{ux[i]}, double{uy[i]}));
    if (max_mag <= 0) max_mag = 1;
  }
  const int k = std::max(1, options.cell_pixels);
  RgbImage img(field.grid_w * k, field.grid_h * k);
  for (int j = 0; j < field.grid_h; ++j) {
    for (int i = 0; i < field.grid_w; ++i) {
      const std::size_t c = field.index(i, j);
      uint8_t rgb[3] = {0, 0, 0};
      if (im[c] != 0.0f) {
        double angle = std::atan2(double{uy[c]}, double{ux[c]}) * 180.0 / std::numbers::pi;
        if (angle < 0) angle += 360.0;
        hsv_to_rgb(angle, std::min(1.0, std::hypot(double{ux[c]}, double{uy[c]}) / max_mag), 1.0, rgb);
      }
      for (int y = j * k; y < (j + 1) * k; ++y) {
        for (int x = i * k; x < (i + 1) * k; ++x) std::copy(rgb, rgb + 3, img.at(x, y));
      }
    }
  }
  return img;
}

}  // namespace mvf::motionfield
