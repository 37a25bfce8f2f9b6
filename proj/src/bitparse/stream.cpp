#include "mvf/bitparse/stream.hpp"

#include <algorithm>
#include <optional>

#include "mvf/bitparse/nal.hpp"

namespace mvf::bitparse {

const char* frame_type_name(FrameType type) {
  switch (type) {
    case FrameType::kI: return "I";
    case FrameType::kP: return "P";
    case FrameType::kB: return "B";
    case FrameType::kUnknown: return "?";
  }
  return "?";
}

namespace {

struct RefPic {
  uint32_t frame_num = 0;
  int frame_index = 0;
};

class StreamParser {
 public:
  ParsedStream run(std::span<const uint8_t> bytes) {
    for (const NalUnit& nal : split_annexb(bytes)) handle(nal);
    finish_picture();
    return std::move(out_);
  }

 private:
  struct Picture {
    ParsedFrame frame;
    SliceHeader first_header;
    const SeqParamSet* sps = nullptr;
    std::optional<PictureState> state;
    std::vector<std::optional<MacroblockRecord>> records;
    bool saw_p = false;
    bool saw_b = false;
    bool saw_i = false;
    int slice_count = 0;
    int issue_count = 0;
  };

  void issue(int frame_index, const NalUnit& nal, const Error& e) {
    out_.issues.push_back(SliceIssue{frame_index, nal.stream_offset, e.kind(), e.what()});
    if (current_ && frame_index == current_->frame.index) ++current_->issue_count;
  }

  void handle(const NalUnit& nal) {
    try {
      switch (nal.unit_type) {
        case kNalSps:
          store_.put(parse_sps(nal.rbsp));
          return;
        case kNalPps:
          store_.put(parse_pps(nal.rbsp));
          return;
        case kNalSliceNonIdr:
        case kNalSliceIdr:
          break;
        case 2: case 3: case 4:
          throw UnsupportedFeature("slice data partitioning");
        default:
          return;
      }
    } catch (const Error& e) {
      issue(current_ ? current_->frame.index : -1, nal, e);
      return;
    }
    handle_slice(nal);
  }

  static bool starts_new_picture(const SliceHeader& prev, const SliceHeader& cur) {
    return cur.first_mb_in_slice == 0 || cur.frame_num != prev.frame_num || cur.pps_id != prev.pps_id ||
           (cur.nal_ref_idc == 0) != (prev.nal_ref_idc == 0) || cur.idr != prev.idr ||
           (cur.idr && cur.idr_pic_id != prev.idr_pic_id) || cur.pic_order_cnt_lsb != prev.pic_order_cnt_lsb;
  }

  void handle_slice(const NalUnit& nal) {
    BitReader reader(nal.rbsp);
    SliceHeader header;
    try {
      header = parse_slice_header(reader, nal.unit_type, nal.ref_idc, store_);
    } catch (const Error& e) {
      issue(current_ ? current_->frame.index : -1, nal, e);
      return;
    }
    if (!current_ || starts_new_picture(current_->first_header, header)) {
      finish_picture();
      start_picture(header);
    }
    Picture& pic = *current_;
    const SeqParamSet& sps = *store_.sps(store_.pps(header.pps_id)->sps_id);
    if (&sps != pic.sps || sps.pic_size_in_mbs() != pic.state->size()) {
      issue(pic.frame.index, nal, MalformedSlice("slice switches SPS inside a picture"));
      return;
    }
    switch (header.slice_type) {
      case SliceType::kP: pic.saw_p = true; break;
      case SliceType::kB: pic.saw_b = true; break;
      default: pic.saw_i = true; break;
    }
    try {
      SliceContext ctx;
      ctx.sps = &sps;
      ctx.pps = store_.pps(header.pps_id);
      ctx.header = &header;
      ctx.slice_id = pic.slice_count++;
      if (header.slice_type == SliceType::kP) ctx.ref_offsets = build_ref_offsets(header, pic.frame.index);
      auto records = decode_macroblocks(reader, ctx, *pic.state);
      for (auto& record : records) {
        pic.records[static_cast<std::size_t>(record.mb_addr)] = std::move(record);
      }
    } catch (const Error& e) {
      issue(pic.frame.index, nal, e);
    }
  }

  void start_picture(const SliceHeader& header) {
    const SeqParamSet* sps = store_.sps(store_.pps(header.pps_id)->sps_id);
    current_.emplace();
    Picture& pic = *current_;
    pic.first_header = header;
    pic.sps = sps;
    pic.state.emplace(sps->pic_width_in_mbs, sps->pic_height_in_map_units);
    pic.records.resize(static_cast<std::size_t>(sps->pic_size_in_mbs()));
    pic.frame.index = next_frame_index_++;
    pic.frame.idr = header.idr;
    pic.frame.frame_num = header.frame_num;
    pic.frame.geometry = FrameGeometry{sps->width(), sps->height(), sps->cropping()};
    if (header.idr) dpb_.clear();
  }

  // ref_offset for each list-0 index: initial short-term order by descending
  // PicNum, then ref_pic_list_modification.
  std::vector<int> build_ref_offsets(const SliceHeader& header, int frame_index) {
    const SeqParamSet& sps = *current_->sps;
    const int64_t max_frame_num = int64_t{1} << sps.log2_max_frame_num;
    const int64_t curr_pic_num = header.frame_num;
    auto pic_num = [&](const RefPic& ref) {
      return static_cast<int64_t>(ref.frame_num) > curr_pic_num ? static_cast<int64_t>(ref.frame_num) - max_frame_num
                                                                 : static_cast<int64_t>(ref.frame_num);
    };
    std::vector<const RefPic*> list;
    for (const RefPic& ref : dpb_) list.push_back(&ref);
    std::stable_sort(list.begin(), list.end(), [&](const RefPic* a, const RefPic* b) { return pic_num(*a) > pic_num(*b); });

    const std::size_t active = static_cast<std::size_t>(header.num_ref_idx_l0);
    list.resize(std::max(list.size(), active + 1), nullptr);
    int64_t pred = curr_pic_num;
    std::size_t ref_idx = 0;
    for (const RefPicModification& mod : header.ref_pic_list_modification_l0) {
      if (mod.idc == 2) throw UnsupportedFeature("long-term reference pictures");
      if (mod.idc > 2) throw MalformedSlice("modification_of_pic_nums_idc " + std::to_string(mod.idc));
      if (ref_idx >= active) throw MalformedSlice("too many ref_pic_list_modification entries");
      const int64_t diff = static_cast<int64_t>(mod.value) + 1;
      if (diff > max_frame_num) throw MalformedSlice("abs_diff_pic_num out of range");
      int64_t no_wrap = mod.idc == 0 ? pred - diff : pred + diff;
      if (no_wrap < 0) no_wrap += max_frame_num;
      if (no_wrap >= max_frame_num) no_wrap -= max_frame_num;
      pred = no_wrap;
      const int64_t target = no_wrap > curr_pic_num ? no_wrap - max_frame_num : no_wrap;
      const RefPic* found = nullptr;
      for (const RefPic& ref : dpb_) {
        if (pic_num(ref) == target) found = &ref;
      }
      if (found == nullptr) throw MalformedSlice("ref_pic_list_modification names a missing picture");
      for (std::size_t c = active; c > ref_idx; --c) list[c] = list[c - 1];
      list[ref_idx++] = found;
      std::size_t n = ref_idx;
      for (std::size_t c = ref_idx; c <= active; ++c) {
        if (list[c] != found) list[n++] = list[c];
      }
    }
    std::vector<int> offsets(active, 0);
    for (std::size_t i = 0; i < active; ++i) {
      if (list[i] == nullptr) continue;
      const int offset = list[i]->frame_index - frame_index;
      if (offset < -16) throw MalformedSlice("reference more than 16 frames away");
      offsets[i] = offset;
    }
    return offsets;
  }

  void mark_reference(const Picture& pic) {
    const SliceHeader& h = pic.first_header;
    if (h.nal_ref_idc == 0) return;
    const SeqParamSet& sps = *pic.sps;
    uint32_t frame_num = h.frame_num;
    if (h.idr) {
      if (h.long_term_reference) {
        out_.issues.push_back(SliceIssue{pic.frame.index, 0, ErrorKind::kUnsupportedFeature,
                                         "long-term reference marking ignored"});
      }
    } else if (h.adaptive_ref_pic_marking) {
      const int64_t max_frame_num = int64_t{1} << sps.log2_max_frame_num;
      for (const MemoryManagementOp& op : h.mmco) {
        if (op.opcode == 1) {
          const int64_t target = static_cast<int64_t>(h.frame_num) - (static_cast<int64_t>(op.difference_of_pic_nums_minus1) + 1);
          std::erase_if(dpb_, [&](const RefPic& ref) {
            const int64_t num = ref.frame_num > h.frame_num ? static_cast<int64_t>(ref.frame_num) - max_frame_num
                                                            : static_cast<int64_t>(ref.frame_num);
            return num == target;
          });
        } else if (op.opcode == 5) {
          dpb_.clear();
          frame_num = 0;
        } else {
          out_.issues.push_back(SliceIssue{pic.frame.index, 0, ErrorKind::kUnsupportedFeature,
                                           "long-term memory_management_control_operation " + std::to_string(op.opcode) + " ignored"});
        }
      }
    } else {
      const std::size_t capacity = static_cast<std::size_t>(std::max(1, sps.max_num_ref_frames));
      while (dpb_.size() >= capacity) {
        auto oldest = std::min_element(dpb_.begin(), dpb_.end(), [&](const RefPic& a, const RefPic& b) {
          auto wrap = [&](const RefPic& r) {
            return r.frame_num > h.frame_num ? static_cast<int64_t>(r.frame_num) - (int64_t{1} << sps.log2_max_frame_num)
                                             : static_cast<int64_t>(r.frame_num);
          };
          return wrap(a) < wrap(b);
        });
        dpb_.erase(oldest);
      }
    }
    dpb_.push_back(RefPic{frame_num, pic.frame.index});
  }

  void finish_picture() {
    if (!current_) return;
    Picture& pic = *current_;
    ParsedFrame& frame = pic.frame;
    frame.type = pic.saw_b ? FrameType::kB : pic.saw_p ? FrameType::kP : pic.saw_i ? FrameType::kI : FrameType::kUnknown;
    frame.macroblocks.reserve(pic.records.size());
    for (std::size_t addr = 0; addr < pic.records.size(); ++addr) {
      if (pic.records[addr]) {
        frame.macroblocks.push_back(std::move(*pic.records[addr]));
      } else {
        ++frame.undecoded_macroblocks;
        frame.macroblocks.push_back(MacroblockRecord{static_cast<int>(addr), MbKind::kIntra, {}});
      }
    }
    if (frame.undecoded_macroblocks > 0 && pic.issue_count == 0) {
      out_.issues.push_back(SliceIssue{frame.index, 0, ErrorKind::kBitstreamDesync,
                                       std::to_string(frame.undecoded_macroblocks) + " macroblocks not covered by any slice"});
    }
    mark_reference(pic);
    out_.frames.push_back(std::move(frame));
    current_.reset();
  }

  ParamSetStore store_;
  std::vector<RefPic> dpb_;
  std::optional<Picture> current_;
  int next_frame_index_ = 0;
  ParsedStream out_;
};

}  // namespace

ParsedStream parse_stream(std::span<const uint8_t> bytes) {
  if (bytes.empty()) throw TruncatedStream("empty stream");
  StreamParser parser;
  return parser.run(bytes);
}

}  // namespace mvf::bitparse
