#include "mvf/bitparse/params.hpp"

#include <string>

#include "mvf/bitparse/nal.hpp"
#include "mvf/error.hpp"

namespace mvf::bitparse {

namespace {

// Bounds that keep every later allocation small for arbitrary input.
constexpr int kMaxPicSizeInMbs = 139264;  // level 6.2 MaxFS
constexpr int kMaxRefFrames = 16;

uint32_t read_ue_max(BitReader& r, uint32_t max, const char* what) {
  const uint32_t v = r.read_ue();
  if (v > max) {
    throw MalformedHeader(std::string(what) + " out of range: " + std::to_string(v));
  }
  return v;
}

int32_t read_se_range(BitReader& r, int32_t lo, int32_t hi, const char* what) {
  const int32_t v = r.read_se();
  if (v < lo || v > hi) {
    throw MalformedHeader(std::string(what) + " out of range: " + std::to_string(v));
  }
  return v;
}

bool is_high_profile(int profile_idc) {
  switch (profile_idc) {
    case 100: case 110: case 122: case 244: case 44: case 83:
    case 86: case 118: case 128: case 138: case 139: case 134: case 135:
      return true;
    default:
      return false;
  }
}

std::vector<int32_t> read_scaling_list(BitReader& r, int size) {
  std::vector<int32_t> deltas;
  int last_scale = 8;
  int next_scale = 8;
  for (int j = 0; j < size && next_scale != 0; ++j) {
    const int32_t delta = read_se_range(r, -128, 127, "delta_scale");
    deltas.push_back(delta);
    next_scale = (last_scale + delta + 256) % 256;
    last_scale = next_scale == 0 ? last_scale : next_scale;
  }
  return deltas;
}

}  // namespace

const char* slice_type_name(SliceType type) {
  switch (type) {
    case SliceType::kP: return "P";
    case SliceType::kB: return "B";
    case SliceType::kI: return "I";
    case SliceType::kSP: return "SP";
    case SliceType::kSI: return "SI";
  }
  return "?";
}

FrameCropping SeqParamSet::cropping() const {
  if (!frame_cropping) return {};
  // 4:2:0 progressive: crop unit is 2 in both directions.
  const int unit_x = chroma_format_idc == 0 ? 1 : 2;
  const int unit_y = (chroma_format_idc == 0 ? 1 : 2) * (frame_mbs_only ? 1 : 2);
  return FrameCropping{static_cast<int>(crop_offsets[0]) * unit_x,
                       static_cast<int>(crop_offsets[1]) * unit_x,
                       static_cast<int>(crop_offsets[2]) * unit_y,
                       static_cast<int>(crop_offsets[3]) * unit_y};
}

bool SeqParamSet::has_high_profile_syntax() const { return is_high_profile(profile_idc); }

void ParamSetStore::put(SeqParamSet sps) { sps_[sps.sps_id] = std::move(sps); }
void ParamSetStore::put(PicParamSet pps) { pps_[pps.pps_id] = std::move(pps); }

const SeqParamSet* ParamSetStore::sps(int id) const {
  auto it = sps_.find(id);
  return it == sps_.end() ? nullptr : &it->second;
}

const PicParamSet* ParamSetStore::pps(int id) const {
  auto it = pps_.find(id);
  return it == pps_.end() ? nullptr : &it->second;
}

SeqParamSet parse_sps(std::span<const uint8_t> rbsp) {
  BitReader r(rbsp);
  SeqParamSet sps;
  sps.profile_idc = static_cast<int>(r.read_bits(8));
  sps.constraint_flags = static_cast<int>(r.read_bits(8));
  sps.level_idc = static_cast<int>(r.read_bits(8));
  sps.sps_id = static_cast<int>(read_ue_max(r, 31, "seq_parameter_set_id"));

  if (is_high_profile(sps.profile_idc)) {
    sps.chroma_format_idc = static_cast<int>(read_ue_max(r, 3, "chroma_format_idc"));
    if (sps.chroma_format_idc == 3) sps.separate_colour_plane = r.read_flag();
    sps.bit_depth_luma = 8 + static_cast<int>(read_ue_max(r, 6, "bit_depth_luma_minus8"));
    sps.bit_depth_chroma = 8 + static_cast<int>(read_ue_max(r, 6, "bit_depth_chroma_minus8"));
    sps.qpprime_y_zero_transform_bypass = r.read_flag();
    sps.seq_scaling_matrix_present = r.read_flag();
    if (sps.seq_scaling_matrix_present) {
      const int lists = sps.chroma_format_idc != 3 ? 8 : 12;
      for (int i = 0; i < lists; ++i) {
        if (r.read_flag()) {
          auto deltas = read_scaling_list(r, i < 6 ? 16 : 64);
          sps.scaling_list_deltas.push_back(std::move(deltas));
        } else {
          sps.scaling_list_deltas.emplace_back();
        }
      }
    }
  }

  sps.log2_max_frame_num = 4 + static_cast<int>(read_ue_max(r, 12, "log2_max_frame_num_minus4"));
  sps.pic_order_cnt_type = static_cast<int>(read_ue_max(r, 2, "pic_order_cnt_type"));
  if (sps.pic_order_cnt_type == 0) {
    sps.log2_max_poc_lsb = 4 + static_cast<int>(read_ue_max(r, 12, "log2_max_pic_order_cnt_lsb_minus4"));
  } else if (sps.pic_order_cnt_type == 1) {
    sps.delta_pic_order_always_zero = r.read_flag();
    sps.offset_for_non_ref_pic = r.read_se();
    sps.offset_for_top_to_bottom_field = r.read_se();
    const uint32_t cycle = read_ue_max(r, 255, "num_ref_frames_in_pic_order_cnt_cycle");
    for (uint32_t i = 0; i < cycle; ++i) sps.offset_for_ref_frame.push_back(r.read_se());
  }
  sps.max_num_ref_frames = static_cast<int>(read_ue_max(r, kMaxRefFrames, "max_num_ref_frames"));
  sps.gaps_in_frame_num_allowed = r.read_flag();
  sps.pic_width_in_mbs = 1 + static_cast<int>(read_ue_max(r, 1023, "pic_width_in_mbs_minus1"));
  sps.pic_height_in_map_units =
      1 + static_cast<int>(read_ue_max(r, 1023, "pic_height_in_map_units_minus1"));
  if (sps.pic_width_in_mbs * sps.pic_height_in_map_units > kMaxPicSizeInMbs) {
    throw MalformedHeader("picture size exceeds " + std::to_string(kMaxPicSizeInMbs) + " macroblocks");
  }
  sps.frame_mbs_only = r.read_flag();
  if (!sps.frame_mbs_only) sps.mb_adaptive_frame_field = r.read_flag();
  sps.direct_8x8_inference = r.read_flag();
  sps.frame_cropping = r.read_flag();
  if (sps.frame_cropping) {
    for (auto& offset : sps.crop_offsets) offset = read_ue_max(r, 8192, "frame_crop_offset");
  }
  sps.vui_parameters_present = r.read_flag();
  sps.tail = capture_remaining(r);

  if (!sps.frame_mbs_only) {
    throw UnsupportedFeature(sps.mb_adaptive_frame_field ? "MBAFF" : "interlace");
  }
  if (sps.separate_colour_plane) throw UnsupportedFeature("separate colour planes");
  if (sps.chroma_format_idc != 1) {
    throw UnsupportedFeature("chroma_format_idc " + std::to_string(sps.chroma_format_idc));
  }
  const FrameCropping crop = sps.cropping();
  if (crop.left + crop.right >= sps.width() || crop.top + crop.bottom >= sps.height()) {
    throw MalformedHeader("cropping removes the whole picture");
  }
  return sps;
}

PicParamSet parse_pps(std::span<const uint8_t> rbsp) {
  BitReader r(rbsp);
  PicParamSet pps;
  pps.pps_id = static_cast<int>(read_ue_max(r, 255, "pic_parameter_set_id"));
  pps.sps_id = static_cast<int>(read_ue_max(r, 31, "seq_parameter_set_id"));
  pps.entropy_coding_mode = r.read_flag() ? EntropyCoding::kCabac : EntropyCoding::kCavlc;
  pps.bottom_field_pic_order_in_frame_present = r.read_flag();
  pps.num_slice_groups = 1 + static_cast<int>(read_ue_max(r, 7, "num_slice_groups_minus1"));
  if (pps.entropy_coding_mode == EntropyCoding::kCabac) throw UnsupportedFeature("CABAC");
  if (pps.num_slice_groups > 1) throw UnsupportedFeature("multiple slice groups");
  pps.num_ref_idx_default_l0 = 1 + static_cast<int>(read_ue_max(r, 31, "num_ref_idx_l0_default_active_minus1"));
  pps.num_ref_idx_default_l1 = 1 + static_cast<int>(read_ue_max(r, 31, "num_ref_idx_l1_default_active_minus1"));
  pps.weighted_pred = r.read_flag();
  pps.weighted_bipred_idc = static_cast<int>(r.read_bits(2));
  if (pps.weighted_bipred_idc == 3) throw MalformedHeader("weighted_bipred_idc 3");
  pps.pic_init_qp = 26 + read_se_range(r, -26, 25, "pic_init_qp_minus26");
  pps.pic_init_qs = 26 + read_se_range(r, -26, 25, "pic_init_qs_minus26");
  pps.chroma_qp_index_offset = read_se_range(r, -12, 12, "chroma_qp_index_offset");
  pps.deblocking_filter_control_present = r.read_flag();
  pps.constrained_intra_pred = r.read_flag();
  pps.redundant_pic_cnt_present = r.read_flag();
  if (r.more_rbsp_data() && r.peek_bits(1) == 1) throw UnsupportedFeature("transform_8x8_mode");
  pps.tail = capture_remaining(r);
  return pps;
}

SliceHeader parse_slice_header(BitReader& r, int nal_unit_type, int nal_ref_idc,
                               const ParamSetStore& store) {
  SliceHeader h;
  h.nal_unit_type = nal_unit_type;
  h.nal_ref_idc = nal_ref_idc;
  h.idr = nal_unit_type == kNalSliceIdr;
  h.first_mb_in_slice = read_ue_max(r, kMaxPicSizeInMbs, "first_mb_in_slice");
  const uint32_t raw_type = read_ue_max(r, 9, "slice_type");
  h.slice_type = static_cast<SliceType>(raw_type % 5);
  h.pps_id = static_cast<int>(read_ue_max(r, 255, "pic_parameter_set_id"));
  const PicParamSet* pps = store.pps(h.pps_id);
  if (pps == nullptr) throw MalformedHeader("slice references unknown PPS " + std::to_string(h.pps_id));
  const SeqParamSet* sps = store.sps(pps->sps_id);
  if (sps == nullptr) throw MalformedHeader("PPS references unknown SPS " + std::to_string(pps->sps_id));
  if (h.first_mb_in_slice >= static_cast<uint32_t>(sps->pic_size_in_mbs())) {
    throw MalformedHeader("first_mb_in_slice beyond picture");
  }
  if (h.idr && h.slice_type != SliceType::kI && h.slice_type != SliceType::kSI) {
    throw MalformedHeader("IDR picture with non-intra slice");
  }

  h.frame_num = r.read_bits(sps->log2_max_frame_num);
  if (h.idr) h.idr_pic_id = read_ue_max(r, 65535, "idr_pic_id");
  if (sps->pic_order_cnt_type == 0) {
    h.pic_order_cnt_lsb = r.read_bits(sps->log2_max_poc_lsb);
    if (pps->bottom_field_pic_order_in_frame_present) h.delta_pic_order_cnt_bottom = r.read_se();
  }
  if (sps->pic_order_cnt_type == 1 && !sps->delta_pic_order_always_zero) {
    h.delta_pic_order_cnt[0] = r.read_se();
    if (pps->bottom_field_pic_order_in_frame_present) h.delta_pic_order_cnt[1] = r.read_se();
  }
  if (pps->redundant_pic_cnt_present) h.redundant_pic_cnt = read_ue_max(r, 127, "redundant_pic_cnt");
  if (h.slice_type == SliceType::kB) h.direct_spatial_mv_pred = r.read_flag();

  h.num_ref_idx_l0 = pps->num_ref_idx_default_l0;
  h.num_ref_idx_l1 = pps->num_ref_idx_default_l1;
  const bool inter = h.slice_type == SliceType::kP || h.slice_type == SliceType::kSP ||
                     h.slice_type == SliceType::kB;
  if (inter && r.read_flag()) {
    h.num_ref_idx_l0 = 1 + static_cast<int>(read_ue_max(r, 31, "num_ref_idx_l0_active_minus1"));
    if (h.slice_type == SliceType::kB) {
      h.num_ref_idx_l1 = 1 + static_cast<int>(read_ue_max(r, 31, "num_ref_idx_l1_active_minus1"));
    }
  }
  if (h.num_ref_idx_l0 > 16 || h.num_ref_idx_l1 > 16) throw MalformedHeader("num_ref_idx_active > 16 for a frame");

  auto read_modifications = [&](std::vector<RefPicModification>& out) {
    if (!r.read_flag()) return;
    for (int guard = 0;; ++guard) {
      if (guard > 64) throw MalformedHeader("unterminated ref_pic_list_modification");
      RefPicModification m;
      m.idc = static_cast<int>(read_ue_max(r, 5, "modification_of_pic_nums_idc"));
      if (m.idc == 3) break;
      m.value = r.read_ue();
      out.push_back(m);
    }
  };
  if (h.slice_type != SliceType::kI && h.slice_type != SliceType::kSI) {
    read_modifications(h.ref_pic_list_modification_l0);
    if (h.slice_type == SliceType::kB) read_modifications(h.ref_pic_list_modification_l1);
  }

  const bool weighted = (pps->weighted_pred && (h.slice_type == SliceType::kP || h.slice_type == SliceType::kSP)) ||
                        (pps->weighted_bipred_idc == 1 && h.slice_type == SliceType::kB);
  if (weighted) {
    // pred_weight_table(): parsed for alignment only.
    read_ue_max(r, 7, "luma_log2_weight_denom");
    read_ue_max(r, 7, "chroma_log2_weight_denom");
    const int lists = h.slice_type == SliceType::kB ? 2 : 1;
    for (int list = 0; list < lists; ++list) {
      const int count = list == 0 ? h.num_ref_idx_l0 : h.num_ref_idx_l1;
      for (int i = 0; i < count; ++i) {
        if (r.read_flag()) {
          r.read_se();
          r.read_se();
        }
        if (r.read_flag()) {
          for (int j = 0; j < 2; ++j) {
            r.read_se();
            r.read_se();
          }
        }
      }
    }
  }

  if (nal_ref_idc != 0) {
    if (h.idr) {
      h.no_output_of_prior_pics = r.read_flag();
      h.long_term_reference = r.read_flag();
    } else {
      h.adaptive_ref_pic_marking = r.read_flag();
      if (h.adaptive_ref_pic_marking) {
        for (int guard = 0;; ++guard) {
          if (guard > 66) throw MalformedHeader("unterminated memory_management_control_operation list");
          MemoryManagementOp op;
          op.opcode = static_cast<int>(read_ue_max(r, 6, "memory_management_control_operation"));
          if (op.opcode == 0) break;
          if (op.opcode == 1 || op.opcode == 3) op.difference_of_pic_nums_minus1 = r.read_ue();
          if (op.opcode == 2) op.long_term_pic_num = r.read_ue();
          if (op.opcode == 3 || op.opcode == 6) op.long_term_frame_idx = r.read_ue();
          if (op.opcode == 4) op.max_long_term_frame_idx_plus1 = r.read_ue();
          h.mmco.push_back(op);
        }
      }
    }
  }

  h.slice_qp_delta = r.read_se();
  h.qp = pps->pic_init_qp + h.slice_qp_delta;
  if (h.qp < -6 * (sps->bit_depth_luma - 8) || h.qp > 51) throw MalformedHeader("slice QP out of range");
  if (h.slice_type == SliceType::kSP || h.slice_type == SliceType::kSI) {
    if (h.slice_type == SliceType::kSP) r.read_flag();
    r.read_se();
  }
  if (pps->deblocking_filter_control_present) {
    h.disable_deblocking_filter_idc = static_cast<int>(read_ue_max(r, 2, "disable_deblocking_filter_idc"));
    if (h.disable_deblocking_filter_idc != 1) {
      h.slice_alpha_c0_offset_div2 = read_se_range(r, -6, 6, "slice_alpha_c0_offset_div2");
      h.slice_beta_offset_div2 = read_se_range(r, -6, 6, "slice_beta_offset_div2");
    }
  }
  return h;
}

std::vector<uint8_t> write_sps(const SeqParamSet& sps) {
  BitWriter w;
  w.write_bits(static_cast<uint32_t>(sps.profile_idc), 8);
  w.write_bits(static_cast<uint32_t>(sps.constraint_flags), 8);
  w.write_bits(static_cast<uint32_t>(sps.level_idc), 8);
  w.write_ue(static_cast<uint32_t>(sps.sps_id));
  if (is_high_profile(sps.profile_idc)) {
    w.write_ue(static_cast<uint32_t>(sps.chroma_format_idc));
    if (sps.chroma_format_idc == 3) w.write_flag(sps.separate_colour_plane);
    w.write_ue(static_cast<uint32_t>(sps.bit_depth_luma - 8));
    w.write_ue(static_cast<uint32_t>(sps.bit_depth_chroma - 8));
    w.write_flag(sps.qpprime_y_zero_transform_bypass);
    w.write_flag(sps.seq_scaling_matrix_present);
    if (sps.seq_scaling_matrix_present) {
      for (const auto& list : sps.scaling_list_deltas) {
        w.write_flag(!list.empty());
        for (int32_t d : list) w.write_se(d);
      }
    }
  }
  w.write_ue(static_cast<uint32_t>(sps.log2_max_frame_num - 4));
  w.write_ue(static_cast<uint32_t>(sps.pic_order_cnt_type));
  if (sps.pic_order_cnt_type == 0) {
    w.write_ue(static_cast<uint32_t>(sps.log2_max_poc_lsb - 4));
  } else if (sps.pic_order_cnt_type == 1) {
    w.write_flag(sps.delta_pic_order_always_zero);
    w.write_se(sps.offset_for_non_ref_pic);
    w.write_se(sps.offset_for_top_to_bottom_field);
    w.write_ue(static_cast<uint32_t>(sps.offset_for_ref_frame.size()));
    for (int32_t o : sps.offset_for_ref_frame) w.write_se(o);
  }
  w.write_ue(static_cast<uint32_t>(sps.max_num_ref_frames));
  w.write_flag(sps.gaps_in_frame_num_allowed);
  w.write_ue(static_cast<uint32_t>(sps.pic_width_in_mbs - 1));
  w.write_ue(static_cast<uint32_t>(sps.pic_height_in_map_units - 1));
  w.write_flag(sps.frame_mbs_only);
  if (!sps.frame_mbs_only) w.write_flag(sps.mb_adaptive_frame_field);
  w.write_flag(sps.direct_8x8_inference);
  w.write_flag(sps.frame_cropping);
  if (sps.frame_cropping) {
    for (uint32_t offset : sps.crop_offsets) w.write_ue(offset);
  }
  w.write_flag(sps.vui_parameters_present);
  if (sps.tail.count > 0) {
    append_bits(w, sps.tail);
  } else {
    w.write_trailing_bits();
  }
  return w.bytes();
}

std::vector<uint8_t> write_pps(const PicParamSet& pps) {
  BitWriter w;
  w.write_ue(static_cast<uint32_t>(pps.pps_id));
  w.write_ue(static_cast<uint32_t>(pps.sps_id));
  w.write_flag(pps.entropy_coding_mode == EntropyCoding::kCabac);
  w.write_flag(pps.bottom_field_pic_order_in_frame_present);
  w.write_ue(static_cast<uint32_t>(pps.num_slice_groups - 1));
  w.write_ue(static_cast<uint32_t>(pps.num_ref_idx_default_l0 - 1));
  w.write_ue(static_cast<uint32_t>(pps.num_ref_idx_default_l1 - 1));
  w.write_flag(pps.weighted_pred);
  w.write_bits(static_cast<uint32_t>(pps.weighted_bipred_idc), 2);
  w.write_se(pps.pic_init_qp - 26);
  w.write_se(pps.pic_init_qs - 26);
  w.write_se(pps.chroma_qp_index_offset);
  w.write_flag(pps.deblocking_filter_control_present);
  w.write_flag(pps.constrained_intra_pred);
  w.write_flag(pps.redundant_pic_cnt_present);
  if (pps.tail.count > 0) {
    append_bits(w, pps.tail);
  } else {
    w.write_trailing_bits();
  }
  return w.bytes();
}

void write_slice_header(BitWriter& w, const SliceHeader& h, const SeqParamSet& sps,
                        const PicParamSet& pps) {
  w.write_ue(h.first_mb_in_slice);
  w.write_ue(static_cast<uint32_t>(h.slice_type));
  w.write_ue(static_cast<uint32_t>(h.pps_id));
  w.write_bits(h.frame_num, sps.log2_max_frame_num);
  if (h.idr) w.write_ue(h.idr_pic_id);
  if (sps.pic_order_cnt_type == 0) w.write_bits(h.pic_order_cnt_lsb, sps.log2_max_poc_lsb);
  if (h.slice_type == SliceType::kP) {
    const bool override = h.num_ref_idx_l0 != pps.num_ref_idx_default_l0;
    w.write_flag(override);
    if (override) w.write_ue(static_cast<uint32_t>(h.num_ref_idx_l0 - 1));
    w.write_flag(false);  // ref_pic_list_modification_flag_l0
  }
  if (h.nal_ref_idc != 0) {
    if (h.idr) {
      w.write_flag(h.no_output_of_prior_pics);
      w.write_flag(h.long_term_reference);
    } else {
      w.write_flag(false);
    }
  }
  w.write_se(h.slice_qp_delta);
  if (pps.deblocking_filter_control_present) {
    w.write_ue(static_cast<uint32_t>(h.disable_deblocking_filter_idc));
    if (h.disable_deblocking_filter_idc != 1) {
      w.write_se(h.slice_alpha_c0_offset_div2);
      w.write_se(h.slice_beta_offset_div2);
    }
  }
}

}  // namespace mvf::bitparse
