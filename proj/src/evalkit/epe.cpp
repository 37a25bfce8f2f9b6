#include "mvf/evalkit/epe.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mvf/error.hpp"

namespace mvf::evalkit {

FlowField flow_from_motion(const motionfield::MotionField& field, int width, int height) {
  if (field.grid_w != motionfield::grid_cells(width) || field.grid_h != motionfield::grid_cells(height)) {
    throw GridMismatch("motion grid " + std::to_string(field.grid_w) + "x" + std::to_string(field.grid_h) +
                       " does not cover " + std::to_string(width) + "x" + std::to_string(height));
  }
  FlowField flow(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t c = field.index(x / 4, y / 4);
      const std::size_t p = flow.index(x, y);
      flow.u[p] = field.past_x[c] == 0.0f ? 0.0f : -field.past_x[c];
      flow.v[p] = field.past_y[c] == 0.0f ? 0.0f : -field.past_y[c];
      flow.valid[p] = 1;
    }
  }
  return flow;
}

FlowField downscale_flow(const FlowField& flow, int factor) {
  if (factor < 1) throw GridMismatch("downscale factor must be >= 1");
  if (factor == 1) return flow;
  const int w = (flow.width + factor - 1) / factor;
  const int h = (flow.height + factor - 1) / factor;
  FlowField out(w, h);
  std::fill(out.valid.begin(), out.valid.end(), uint8_t{0});
  for (int by = 0; by < h; ++by) {
    for (int bx = 0; bx < w; ++bx) {
      double su = 0, sv = 0;
      int n = 0;
      for (int y = by * factor; y < std::min(flow.height, (by + 1) * factor); ++y) {
        for (int x = bx * factor; x < std::min(flow.width, (bx + 1) * factor); ++x) {
          const std::size_t p = flow.index(x, y);
          if (!flow.valid[p]) continue;
          su += flow.u[p];
          sv += flow.v[p];
          ++n;
        }
      }
      if (n == 0) continue;
      const std::size_t q = out.index(bx, by);
      out.u[q] = static_cast<float>(su / n / factor);
      out.v[q] = static_cast<float>(sv / n / factor);
      out.valid[q] = 1;
    }
  }
  return out;
}

double epe(const FlowField& pred, const FlowField& gt) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw GridMismatch("flow sizes differ: " + std::to_string(pred.width) + "x" + std::to_string(pred.height) + " vs " +
                       std::to_string(gt.width) + "x" + std::to_string(gt.height));
  }
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!pred.valid[i] || !gt.valid[i]) continue;
    const double du = static_cast<double>(pred.u[i]) - gt.u[i];
    const double dv = static_cast<double>(pred.v[i]) - gt.v[i];
    sum += std::sqrt(du * du + dv * dv);
    ++n;
  }
  if (n == 0) throw GridMismatch("no pixel is valid in both flow fields");
  return sum / static_cast<double>(n);
}

double epe(const FlowField& pred, const FlowField& gt, int downscale) {
  return epe(downscale_flow(pred, downscale), downscale_flow(gt, downscale));
}

std::vector<EpeReport> epe_mv_pipeline(const ingest::FieldSequence& fields, const std::map<int, FlowField>& gt,
                                       const std::vector<int>& downscales) {
  std::vector<EpeReport> reports;
  for (int d : downscales) reports.push_back(EpeReport{d, "MV", 0.0, 0});
  std::vector<double> sums(downscales.size(), 0.0);
  std::vector<std::size_t> counts(downscales.size(), 0);
  for (const ingest::FieldFrame& frame : fields.frames) {
    if (frame.type != bitparse::FrameType::kP) continue;
    const auto it = gt.find(frame.frame_index - 1);
    if (it == gt.end()) continue;
    const FlowField pred = flow_from_motion(frame.field, fields.width, fields.height);
    if (it->second.width != fields.width || it->second.height != fields.height) {
      throw GridMismatch("ground truth flow " + std::to_string(it->first) + " does not match the video size");
    }
    for (std::size_t k = 0; k < downscales.size(); ++k) {
      const FlowField p = downscale_flow(pred, downscales[k]);
      const FlowField g = downscale_flow(it->second, downscales[k]);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g.valid[i]) continue;
        const double du = static_cast<double>(p.u[i]) - g.u[i];
        const double dv = static_cast<double>(p.v[i]) - g.v[i];
        sums[k] += std::sqrt(du * du + dv * dv);
        ++counts[k];
      }
      ++reports[k].frames;
    }
  }
  if (reports.empty() || reports.front().frames == 0) throw NoPFrames("no P-frame has a ground truth flow partner");
  for (std::size_t k = 0; k < reports.size(); ++k) {
    if (counts[k] == 0) throw GridMismatch("ground truth has no valid pixels");
    reports[k].epe = sums[k] / static_cast<double>(counts[k]);
  }
  return reports;
}

std::string epe_csv(const std::vector<EpeReport>& reports) {
  std::ostringstream out;
  out << "downscale,method,epe,frames\n";
  out.precision(6);
  out << std::fixed;
  for (const EpeReport& r : reports) out << "1/" << r.downscale << ',' << r.method << ',' << r.epe << ',' << r.frames << '\n';
  return out.str();
}

}  // namespace mvf::evalkit
