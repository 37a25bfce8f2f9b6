#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mvf/bitparse/bits.hpp"

namespace mvf::bitparse {

struct FrameCropping {
  // Offsets in luma pixels (already multiplied by the crop unit).
  int left = 0;
  int right = 0;
  int top = 0;
  int bottom = 0;

  bool operator==(const FrameCropping&) const = default;
};

struct SeqParamSet {
  int profile_idc = 66;
  int constraint_flags = 0;  // the 8 bits following profile_idc
  int level_idc = 30;
  int sps_id = 0;

  // Present only for the high-profile family.
  int chroma_format_idc = 1;
  bool separate_colour_plane = false;
  int bit_depth_luma = 8;
  int bit_depth_chroma = 8;
  bool qpprime_y_zero_transform_bypass = false;
  bool seq_scaling_matrix_present = false;
  // delta_scale values per list; empty vector = list not present.
  std::vector<std::vector<int32_t>> scaling_list_deltas;

  int log2_max_frame_num = 4;
  int pic_order_cnt_type = 0;
  int log2_max_poc_lsb = 4;
  bool delta_pic_order_always_zero = false;
  int32_t offset_for_non_ref_pic = 0;
  int32_t offset_for_top_to_bottom_field = 0;
  std::vector<int32_t> offset_for_ref_frame;

  int max_num_ref_frames = 1;
  bool gaps_in_frame_num_allowed = false;
  int pic_width_in_mbs = 1;
  int pic_height_in_map_units = 1;
  bool frame_mbs_only = true;
  bool mb_adaptive_frame_field = false;
  bool direct_8x8_inference = true;

  bool frame_cropping = false;
  std::array<uint32_t, 4> crop_offsets{};  // left, right, top, bottom in crop units

  bool vui_parameters_present = false;
  // VUI syntax and rbsp trailing bits, kept verbatim.
  RawBits tail;

  int width() const { return pic_width_in_mbs * 16; }
  int height() const { return pic_height_in_map_units * 16; }
  FrameCropping cropping() const;
  int pic_size_in_mbs() const { return pic_width_in_mbs * pic_height_in_map_units; }
  bool has_high_profile_syntax() const;

  bool operator==(const SeqParamSet&) const = default;
};

enum class EntropyCoding { kCavlc, kCabac };

struct PicParamSet {
  int pps_id = 0;
  int sps_id = 0;
  EntropyCoding entropy_coding_mode = EntropyCoding::kCavlc;
  bool bottom_field_pic_order_in_frame_present = false;
  int num_slice_groups = 1;
  int num_ref_idx_default_l0 = 1;
  int num_ref_idx_default_l1 = 1;
  bool weighted_pred = false;
  int weighted_bipred_idc = 0;
  int pic_init_qp = 26;
  int pic_init_qs = 26;
  int chroma_qp_index_offset = 0;
  bool deblocking_filter_control_present = false;
  bool constrained_intra_pred = false;
  bool redundant_pic_cnt_present = false;
  // Optional high-profile extension and trailing bits, kept verbatim.
  RawBits tail;

  bool operator==(const PicParamSet&) const = default;
};

enum class SliceType { kP = 0, kB = 1, kI = 2, kSP = 3, kSI = 4 };

const char* slice_type_name(SliceType type);

struct RefPicModification {
  int idc = 3;
  uint32_t value = 0;  // abs_diff_pic_num_minus1 or long_term_pic_num
};

struct MemoryManagementOp {
  int opcode = 0;
  uint32_t difference_of_pic_nums_minus1 = 0;
  uint32_t long_term_pic_num = 0;
  uint32_t long_term_frame_idx = 0;
  uint32_t max_long_term_frame_idx_plus1 = 0;
};

struct SliceHeader {
  int nal_unit_type = 1;
  int nal_ref_idc = 0;
  bool idr = false;

  uint32_t first_mb_in_slice = 0;
  SliceType slice_type = SliceType::kI;
  int pps_id = 0;
  uint32_t frame_num = 0;
  uint32_t idr_pic_id = 0;
  uint32_t pic_order_cnt_lsb = 0;
  int32_t delta_pic_order_cnt_bottom = 0;
  std::array<int32_t, 2> delta_pic_order_cnt{};
  uint32_t redundant_pic_cnt = 0;
  bool direct_spatial_mv_pred = false;
  int num_ref_idx_l0 = 1;
  int num_ref_idx_l1 = 1;
  std::vector<RefPicModification> ref_pic_list_modification_l0;
  std::vector<RefPicModification> ref_pic_list_modification_l1;
  bool no_output_of_prior_pics = false;
  bool long_term_reference = false;
  bool adaptive_ref_pic_marking = false;
  std::vector<MemoryManagementOp> mmco;
  int slice_qp_delta = 0;
  int qp = 26;
  int disable_deblocking_filter_idc = 0;
  int slice_alpha_c0_offset_div2 = 0;
  int slice_beta_offset_div2 = 0;
};

// Active parameter sets by id.
class ParamSetStore {
 public:
  void put(SeqParamSet sps);
  void put(PicParamSet pps);
  const SeqParamSet* sps(int id) const;
  const PicParamSet* pps(int id) const;

 private:
  std::map<int, SeqParamSet> sps_;
  std::map<int, PicParamSet> pps_;
};

// Header parsers. Unsupported features (CABAC, interlace, MBAFF, slice groups,
// 8x8 transform, non-4:2:0 chroma) throw UnsupportedFeature naming the
// feature; syntax violations throw MalformedHeader.
SeqParamSet parse_sps(std::span<const uint8_t> rbsp);
PicParamSet parse_pps(std::span<const uint8_t> rbsp);
// Leaves `reader` positioned at the first bit of slice_data().
SliceHeader parse_slice_header(BitReader& reader, int nal_unit_type, int nal_ref_idc,
                               const ParamSetStore& store);

std::vector<uint8_t> write_sps(const SeqParamSet& sps);
std::vector<uint8_t> write_pps(const PicParamSet& pps);
// Writes a slice header for the restricted I/P subset produced by the
// synthetic encoder; the caller appends slice data and trailing bits.
void write_slice_header(BitWriter& writer, const SliceHeader& header, const SeqParamSet& sps,
                        const PicParamSet& pps);

}  // namespace mvf::bitparse
