#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mvf/bitparse/bits.hpp"
#include "mvf/bitparse/params.hpp"

namespace mvf::bitparse {

enum class MvDirection { kPast, kFuture };

// Quarter-pel motion vector.
struct Mv {
  int x = 0;
  int y = 0;

  bool operator==(const Mv&) const = default;
};

struct PartitionMv {
  int x0 = 0;  // pixel offset of the partition within the coded frame
  int y0 = 0;
  int w = 16;
  int h = 16;
  int mv_x = 0;  // quarter-pel
  int mv_y = 0;
  int ref_offset = -1;  // signed frame distance, negative = past
  MvDirection direction = MvDirection::kPast;

  bool operator==(const PartitionMv&) const = default;
};

enum class MbKind { kIntra, kInter, kSkip };

struct MacroblockRecord {
  int mb_addr = 0;
  MbKind kind = MbKind::kIntra;
  std::vector<PartitionMv> partitions;  // empty iff intra

  bool operator==(const MacroblockRecord&) const = default;
};

const char* mb_kind_name(MbKind kind);

// ---- Motion vector prediction ----

struct MvNeighbor {
  bool available = false;
  int ref_idx = -1;  // -1 for intra or unavailable neighbours
  Mv mv;
};

enum class PartitionShape { kDefault, k16x8Top, k16x8Bottom, k8x16Left, k8x16Right };

Mv median(Mv a, Mv b, Mv c);

// Motion vector predictor for an inter partition from its left (A), top (B),
// top-right (C) and top-left (D) neighbours. D replaces C when C is not
// available.
Mv predict_mv(MvNeighbor a, MvNeighbor b, MvNeighbor c, MvNeighbor d, int ref_idx,
              PartitionShape shape);

// Inferred motion of a P_Skip macroblock.
Mv predict_skip_mv(MvNeighbor a, MvNeighbor b, MvNeighbor c, MvNeighbor d);

// ---- Slice data ----

// Per-picture macroblock state shared by all slices of one picture; holds what
// neighbouring macroblocks contribute to CAVLC contexts and MV prediction.
class PictureState {
 public:
  PictureState(int width_mbs, int height_mbs);

  struct Mb {
    int slice_id = -1;  // -1 until decoded
    bool skip = false;
    bool intra = false;
    std::array<uint8_t, 16> luma_coeffs{};  // raster 4x4 order
    std::array<std::array<uint8_t, 4>, 2> chroma_coeffs{};
    std::array<Mv, 16> mv{};
    std::array<int8_t, 16> ref_idx{};
  };

  int width_mbs() const { return width_mbs_; }
  int height_mbs() const { return height_mbs_; }
  int size() const { return width_mbs_ * height_mbs_; }
  Mb& at(int addr) { return mbs_[static_cast<std::size_t>(addr)]; }
  const Mb& at(int addr) const { return mbs_[static_cast<std::size_t>(addr)]; }
  int decoded_count() const;

 private:
  int width_mbs_;
  int height_mbs_;
  std::vector<Mb> mbs_;
};

struct SliceContext {
  const SeqParamSet* sps = nullptr;
  const PicParamSet* pps = nullptr;
  const SliceHeader* header = nullptr;
  int slice_id = 0;
  // Signed frame distance per ref_idx of list 0; 0 marks a missing reference.
  std::vector<int> ref_offsets;
};

// Decodes slice_data() for a CAVLC I or P slice. Returns one record per
// macroblock covered by the slice in raster order. Residual coefficients are
// parsed for bit alignment and discarded.
std::vector<MacroblockRecord> decode_macroblocks(BitReader& reader, const SliceContext& ctx,
                                                 PictureState& picture);

}  // namespace mvf::bitparse
