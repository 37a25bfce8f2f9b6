#pragma once

#include <map>
#include <string>
#include <vector>

#include "mvf/ingest/fields.hpp"
#include "mvf/ingest/flo.hpp"
#include "mvf/motionfield/motionfield.hpp"

namespace mvf::evalkit {

using ingest::FlowField;

// Dense forward flow predicted from a P-frame's past motion: each 4x4 cell is
// expanded by nearest neighbour and negated, since a past MV points from the
// current block back to where it came from. Cells without motion give zero.
FlowField flow_from_motion(const motionfield::MotionField& field, int width, int height);

// Average pooling over factor x factor blocks (partial blocks at the right
// and bottom edges included) using valid pixels only, with vectors divided by
// the factor. A pooled pixel is valid when any source pixel was.
FlowField downscale_flow(const FlowField& flow, int factor);

// Mean end-point error over pixels valid in both fields. GridMismatch when
// the sizes differ or no pixel is valid.
double epe(const FlowField& pred, const FlowField& gt);
double epe(const FlowField& pred, const FlowField& gt, int downscale);

struct EpeReport {
  int downscale = 1;
  std::string method;
  double epe = 0;
  int frames = 0;
};

// Ground truth flow i describes motion from frame i to frame i+1 and is
// compared with the motion of P-frame i+1. Only P-frames with a ground truth
// partner count; the mean is taken over all their valid pixels. NoPFrames when
// none qualify.
std::vector<EpeReport> epe_mv_pipeline(const ingest::FieldSequence& fields, const std::map<int, FlowField>& gt,
                                       const std::vector<int>& downscales = {1, 4, 16});

// CSV header: downscale,method,epe,frames
std::string epe_csv(const std::vector<EpeReport>& reports);

struct EpeReference {
  int downscale;
  const char* method;
  double epe;
};

// Published Sintel (clean) results, kept for side-by-side display only.
inline constexpr EpeReference kSintelReference[] = {
    {1, "RAFT", 0.603}, {1, "MVs", 2.193}, {4, "RAFT", 0.611}, {4, "MVs", 2.364}, {16, "RAFT", 0.652}, {16, "MVs", 2.527},
};

}  // namespace mvf::evalkit
