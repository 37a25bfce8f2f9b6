#include "mvf/bitparse/macroblock.hpp"

#include <algorithm>
#include <string>

#include "cavlc.hpp"
#include "mvf/error.hpp"

namespace mvf::bitparse {

const char* mb_kind_name(MbKind kind) {
  switch (kind) {
    case MbKind::kIntra: return "intra";
    case MbKind::kInter: return "inter";
    case MbKind::kSkip: return "skip";
  }
  return "?";
}

Mv median(Mv a, Mv b, Mv c) {
  auto med = [](int x, int y, int z) { return std::max(std::min(x, y), std::min(std::max(x, y), z)); };
  return Mv{med(a.x, b.x, c.x), med(a.y, b.y, c.y)};
}

Mv predict_mv(MvNeighbor a, MvNeighbor b, MvNeighbor c, MvNeighbor d, int ref_idx,
              PartitionShape shape) {
  if (!c.available) c = d;

  switch (shape) {
    case PartitionShape::k16x8Top:
      if (b.ref_idx == ref_idx) return b.mv;
      break;
    case PartitionShape::k16x8Bottom:
      if (a.ref_idx == ref_idx) return a.mv;
      break;
    case PartitionShape::k8x16Left:
      if (a.ref_idx == ref_idx) return a.mv;
      break;
    case PartitionShape::k8x16Right:
      if (c.ref_idx == ref_idx) return c.mv;
      break;
    case PartitionShape::kDefault:
      break;
  }

  if (!b.available && !c.available && a.available) {
    b = a;
    c = a;
  }
  const int matches = (a.ref_idx == ref_idx) + (b.ref_idx == ref_idx) + (c.ref_idx == ref_idx);
  if (matches == 1) {
    if (a.ref_idx == ref_idx) return a.mv;
    if (b.ref_idx == ref_idx) return b.mv;
    return c.mv;
  }
  return median(a.mv, b.mv, c.mv);
}

Mv predict_skip_mv(MvNeighbor a, MvNeighbor b, MvNeighbor c, MvNeighbor d) {
  if (!a.available || !b.available) return Mv{};
  if (a.ref_idx == 0 && a.mv == Mv{}) return Mv{};
  if (b.ref_idx == 0 && b.mv == Mv{}) return Mv{};
  return predict_mv(a, b, c, d, 0, PartitionShape::kDefault);
}

PictureState::PictureState(int width_mbs, int height_mbs)
    : width_mbs_(width_mbs),
      height_mbs_(height_mbs),
      mbs_(static_cast<std::size_t>(width_mbs) * static_cast<std::size_t>(height_mbs)) {}

int PictureState::decoded_count() const {
  return static_cast<int>(std::count_if(mbs_.begin(), mbs_.end(), [](const Mb& mb) { return mb.slice_id >= 0; }));
}

namespace {

enum class InterType { k16x16, k16x8, k8x16, k8x8, k8x8Ref0 };

struct Partition {
  int x = 0;  // luma offset inside the macroblock
  int y = 0;
  int w = 16;
  int h = 16;
  int ref_idx = 0;
  Mv mvd;
  PartitionShape shape = PartitionShape::kDefault;
};

struct Location {
  bool available = false;
  int addr = -1;
  int x = 0;  // position inside macroblock `addr`
  int y = 0;
};

class MacroblockDecoder {
 public:
  MacroblockDecoder(BitReader& reader, const SliceContext& ctx, PictureState& picture)
      : r_(reader), ctx_(ctx), pic_(picture) {}

  std::vector<MacroblockRecord> run() {
    const SliceHeader& h = *ctx_.header;
    const bool p_slice = h.slice_type == SliceType::kP;
    std::vector<MacroblockRecord> records;
    int addr = static_cast<int>(h.first_mb_in_slice);
    bool more = true;
    while (more) {
      if (p_slice) {
        const uint32_t run = r_.read_ue();
        if (run > static_cast<uint32_t>(pic_.size() - addr)) {
          throw BitstreamDesync("mb_skip_run of " + std::to_string(run) + " runs past the picture end");
        }
        for (uint32_t i = 0; i < run; ++i) records.push_back(decode_skip(addr++));
        if (run > 0) more = r_.more_rbsp_data();
      }
      if (more) {
        if (addr >= pic_.size()) throw BitstreamDesync("slice data continues past the last macroblock");
        records.push_back(decode_macroblock(addr++));
        more = r_.more_rbsp_data();
      }
    }
    return records;
  }

 private:
  void begin(int addr) {
    if (pic_.at(addr).slice_id >= 0) {
      throw BitstreamDesync("macroblock " + std::to_string(addr) + " decoded twice");
    }
    addr_ = addr;
    mb_x_ = addr % pic_.width_mbs();
    mb_y_ = addr / pic_.width_mbs();
    done_mask_ = 0;
    PictureState::Mb& mb = pic_.at(addr);
    mb = PictureState::Mb{};
    mb.slice_id = ctx_.slice_id;
    mb.ref_idx.fill(-1);
  }

  bool mb_available(int addr) const {
    return addr >= 0 && addr < addr_ && pic_.at(addr).slice_id == ctx_.slice_id;
  }

  // Neighbouring location for a luma (max 16) or chroma (max 8) position
  // relative to the current macroblock.
  Location locate(int xn, int yn, int max) const {
    const int w = pic_.width_mbs();
    Location loc;
    if (yn >= max) return loc;
    int addr = -1;
    if (xn < 0) {
      if (mb_x_ == 0) return loc;
      addr = yn < 0 ? (mb_y_ == 0 ? -1 : addr_ - w - 1) : addr_ - 1;
    } else if (xn < max) {
      addr = yn < 0 ? (mb_y_ == 0 ? -1 : addr_ - w) : addr_;
    } else {
      if (yn >= 0 || mb_x_ == w - 1 || mb_y_ == 0) return loc;
      addr = addr_ - w + 1;
    }
    if (addr != addr_ && !mb_available(addr)) return loc;
    loc.available = true;
    loc.addr = addr;
    loc.x = (xn + max) % max;
    loc.y = (yn + max) % max;
    return loc;
  }

  MvNeighbor mv_neighbor(int xn, int yn) const {
    const Location loc = locate(xn, yn, 16);
    MvNeighbor n;
    if (!loc.available) return n;
    const int blk = (loc.y / 4) * 4 + loc.x / 4;
    if (loc.addr == addr_ && !(done_mask_ & (1u << blk))) return n;
    const PictureState::Mb& mb = pic_.at(loc.addr);
    n.available = true;
    n.ref_idx = mb.ref_idx[static_cast<std::size_t>(blk)];
    n.mv = mb.mv[static_cast<std::size_t>(blk)];
    return n;
  }

  void store_mv(int x, int y, int w, int h, int ref_idx, Mv mv) {
    PictureState::Mb& mb = pic_.at(addr_);
    for (int by = y / 4; by < (y + h) / 4; ++by) {
      for (int bx = x / 4; bx < (x + w) / 4; ++bx) {
        const int blk = by * 4 + bx;
        mb.mv[static_cast<std::size_t>(blk)] = mv;
        mb.ref_idx[static_cast<std::size_t>(blk)] = static_cast<int8_t>(ref_idx);
        done_mask_ |= 1u << blk;
      }
    }
  }

  int ref_offset(int ref_idx) const {
    if (ref_idx < 0 || ref_idx >= static_cast<int>(ctx_.ref_offsets.size()) ||
        ctx_.ref_offsets[static_cast<std::size_t>(ref_idx)] == 0) {
      throw MalformedSlice("reference picture " + std::to_string(ref_idx) + " is not available");
    }
    return ctx_.ref_offsets[static_cast<std::size_t>(ref_idx)];
  }

  PartitionMv make_partition(const Partition& p, Mv mv) const {
    PartitionMv out;
    out.x0 = mb_x_ * 16 + p.x;
    out.y0 = mb_y_ * 16 + p.y;
    out.w = p.w;
    out.h = p.h;
    out.mv_x = mv.x;
    out.mv_y = mv.y;
    out.ref_offset = ref_offset(p.ref_idx);
    out.direction = out.ref_offset < 0 ? MvDirection::kPast : MvDirection::kFuture;
    return out;
  }

  MacroblockRecord decode_skip(int addr) {
    begin(addr);
    PictureState::Mb& mb = pic_.at(addr);
    mb.skip = true;
    const Mv mv = predict_skip_mv(mv_neighbor(-1, 0), mv_neighbor(0, -1), mv_neighbor(16, -1), mv_neighbor(-1, -1));
    store_mv(0, 0, 16, 16, 0, mv);
    MacroblockRecord record;
    record.mb_addr = addr;
    record.kind = MbKind::kSkip;
    record.partitions.push_back(make_partition(Partition{}, mv));
    return record;
  }

  MacroblockRecord decode_macroblock(int addr) {
    begin(addr);
    const bool p_slice = ctx_.header->slice_type == SliceType::kP;
    uint32_t mb_type = r_.read_ue();
    if (p_slice) {
      if (mb_type > 30) throw MalformedSlice("P mb_type " + std::to_string(mb_type));
      if (mb_type < 5) return decode_inter(addr, static_cast<InterType>(mb_type));
      mb_type -= 5;
    } else if (mb_type > 25) {
      throw MalformedSlice("I mb_type " + std::to_string(mb_type));
    }
    decode_intra(mb_type);
    MacroblockRecord record;
    record.mb_addr = addr;
    record.kind = MbKind::kIntra;
    return record;
  }

  void decode_intra(uint32_t mb_type) {
    PictureState::Mb& mb = pic_.at(addr_);
    mb.intra = true;
    store_mv(0, 0, 16, 16, -1, Mv{});

    if (mb_type == 25) {  // I_PCM
      while (!r_.byte_aligned()) {
        if (r_.read_bits(1) != 0) throw MalformedSlice("non-zero pcm_alignment_zero_bit");
      }
      const std::size_t bits = 256u * static_cast<std::size_t>(ctx_.sps->bit_depth_luma) +
                               128u * static_cast<std::size_t>(ctx_.sps->bit_depth_chroma);
      r_.skip_bits(bits);
      mb.luma_coeffs.fill(16);
      for (auto& plane : mb.chroma_coeffs) plane.fill(16);
      return;
    }

    const bool i16 = mb_type >= 1;
    int cbp_luma = 0;
    int cbp_chroma = 0;
    if (i16) {
      const uint32_t idx = mb_type - 1;
      cbp_chroma = static_cast<int>((idx / 4) % 3);
      cbp_luma = idx >= 12 ? 15 : 0;
    } else {
      for (int i = 0; i < 16; ++i) {
        if (!r_.read_flag()) r_.read_bits(3);  // rem_intra4x4_pred_mode
      }
    }
    if (r_.read_ue() > 3) throw MalformedSlice("intra_chroma_pred_mode out of range");
    if (!i16) {
      const int cbp = cavlc::decode_cbp(r_.read_ue(), true);
      cbp_luma = cbp & 15;
      cbp_chroma = cbp >> 4;
    }
    if (cbp_luma > 0 || cbp_chroma > 0 || i16) {
      read_qp_delta();
      parse_residual(i16, cbp_luma, cbp_chroma);
    }
  }

  MacroblockRecord decode_inter(int addr, InterType type) {
    const int num_ref = ctx_.header->num_ref_idx_l0;
    std::vector<Partition> parts;

    if (type == InterType::k8x8 || type == InterType::k8x8Ref0) {
      std::array<uint32_t, 4> sub_types{};
      for (auto& st : sub_types) {
        st = r_.read_ue();
        if (st > 3) throw MalformedSlice("P sub_mb_type " + std::to_string(st));
      }
      std::array<int, 4> refs{};
      for (auto& ref : refs) {
        ref = (num_ref > 1 && type != InterType::k8x8Ref0) ? read_ref_idx(num_ref) : 0;
      }
      for (int i = 0; i < 4; ++i) {
        const int ox = (i % 2) * 8;
        const int oy = (i / 2) * 8;
        const int count = sub_types[static_cast<std::size_t>(i)] == 0 ? 1 : sub_types[static_cast<std::size_t>(i)] == 3 ? 4 : 2;
        for (int j = 0; j < count; ++j) {
          Partition p;
          p.ref_idx = refs[static_cast<std::size_t>(i)];
          switch (sub_types[static_cast<std::size_t>(i)]) {
            case 0: p.x = ox; p.y = oy; p.w = 8; p.h = 8; break;
            case 1: p.x = ox; p.y = oy + 4 * j; p.w = 8; p.h = 4; break;
            case 2: p.x = ox + 4 * j; p.y = oy; p.w = 4; p.h = 8; break;
            default: p.x = ox + 4 * (j % 2); p.y = oy + 4 * (j / 2); p.w = 4; p.h = 4; break;
          }
          p.mvd.x = r_.read_se();
          p.mvd.y = r_.read_se();
          parts.push_back(p);
        }
      }
    } else {
      switch (type) {
        case InterType::k16x16:
          parts.push_back(Partition{0, 0, 16, 16, 0, {}, PartitionShape::kDefault});
          break;
        case InterType::k16x8:
          parts.push_back(Partition{0, 0, 16, 8, 0, {}, PartitionShape::k16x8Top});
          parts.push_back(Partition{0, 8, 16, 8, 0, {}, PartitionShape::k16x8Bottom});
          break;
        default:
          parts.push_back(Partition{0, 0, 8, 16, 0, {}, PartitionShape::k8x16Left});
          parts.push_back(Partition{8, 0, 8, 16, 0, {}, PartitionShape::k8x16Right});
          break;
      }
      if (num_ref > 1) {
        for (auto& p : parts) p.ref_idx = read_ref_idx(num_ref);
      }
      for (auto& p : parts) {
        p.mvd.x = r_.read_se();
        p.mvd.y = r_.read_se();
      }
    }

    MacroblockRecord record;
    record.mb_addr = addr;
    record.kind = MbKind::kInter;
    for (const Partition& p : parts) {
      const Mv pred = predict_mv(mv_neighbor(p.x - 1, p.y), mv_neighbor(p.x, p.y - 1),
                                 mv_neighbor(p.x + p.w, p.y - 1), mv_neighbor(p.x - 1, p.y - 1),
                                 p.ref_idx, p.shape);
      const Mv mv{pred.x + p.mvd.x, pred.y + p.mvd.y};
      store_mv(p.x, p.y, p.w, p.h, p.ref_idx, mv);
      record.partitions.push_back(make_partition(p, mv));
    }

    const int cbp = cavlc::decode_cbp(r_.read_ue(), false);
    if (cbp != 0) {
      read_qp_delta();
      parse_residual(false, cbp & 15, cbp >> 4);
    }
    return record;
  }

  int read_ref_idx(int num_ref) {
    const uint32_t ref = r_.read_te(static_cast<uint32_t>(num_ref - 1));
    if (ref >= static_cast<uint32_t>(num_ref)) throw MalformedSlice("ref_idx_l0 " + std::to_string(ref) + " out of range");
    return static_cast<int>(ref);
  }

  void read_qp_delta() {
    const int32_t delta = r_.read_se();
    const int offset = 3 * (ctx_.sps->bit_depth_luma - 8);
    if (delta < -(26 + offset) || delta > 25 + offset) throw MalformedSlice("mb_qp_delta out of range");
  }

  int luma_nc(int bx, int by) const {
    const Location a = locate(bx * 4 - 1, by * 4, 16);
    const Location b = locate(bx * 4, by * 4 - 1, 16);
    auto count = [&](const Location& l) {
      return static_cast<int>(pic_.at(l.addr).luma_coeffs[static_cast<std::size_t>((l.y / 4) * 4 + l.x / 4)]);
    };
    return combine_nc(a, b, count);
  }

  int chroma_nc(int plane, int bx, int by) const {
    const Location a = locate(bx * 4 - 1, by * 4, 8);
    const Location b = locate(bx * 4, by * 4 - 1, 8);
    auto count = [&](const Location& l) {
      return static_cast<int>(
          pic_.at(l.addr).chroma_coeffs[static_cast<std::size_t>(plane)][static_cast<std::size_t>((l.y / 4) * 2 + l.x / 4)]);
    };
    return combine_nc(a, b, count);
  }

  template <typename Count>
  static int combine_nc(const Location& a, const Location& b, Count count) {
    if (a.available && b.available) return (count(a) + count(b) + 1) >> 1;
    if (a.available) return count(a);
    if (b.available) return count(b);
    return 0;
  }

  void parse_residual(bool i16, int cbp_luma, int cbp_chroma) {
    PictureState::Mb& mb = pic_.at(addr_);
    if (i16) cavlc::parse_residual_block(r_, luma_nc(0, 0), 16);
    for (int i8 = 0; i8 < 4; ++i8) {
      for (int i4 = 0; i4 < 4; ++i4) {
        const int bx = (i8 % 2) * 2 + i4 % 2;
        const int by = (i8 / 2) * 2 + i4 / 2;
        uint8_t total = 0;
        if (cbp_luma & (1 << i8)) {
          total = static_cast<uint8_t>(cavlc::parse_residual_block(r_, luma_nc(bx, by), i16 ? 15 : 16));
        }
        mb.luma_coeffs[static_cast<std::size_t>(by * 4 + bx)] = total;
      }
    }
    if (cbp_chroma & 3) {
      for (int plane = 0; plane < 2; ++plane) cavlc::parse_residual_block(r_, -1, 4);
    }
    if (cbp_chroma & 2) {
      for (int plane = 0; plane < 2; ++plane) {
        for (int i4 = 0; i4 < 4; ++i4) {
          const int bx = i4 % 2;
          const int by = i4 / 2;
          const int total = cavlc::parse_residual_block(r_, chroma_nc(plane, bx, by), 15);
          mb.chroma_coeffs[static_cast<std::size_t>(plane)][static_cast<std::size_t>(by * 2 + bx)] = static_cast<uint8_t>(total);
        }
      }
    }
  }

  BitReader& r_;
  const SliceContext& ctx_;
  PictureState& pic_;
  int addr_ = 0;
  int mb_x_ = 0;
  int mb_y_ = 0;
  uint32_t done_mask_ = 0;
};

}  // namespace

std::vector<MacroblockRecord> decode_macroblocks(BitReader& reader, const SliceContext& ctx,
                                                 PictureState& picture) {
  const SliceType type = ctx.header->slice_type;
  if (type != SliceType::kI && type != SliceType::kP) {
    throw UnsupportedFeature(std::string(slice_type_name(type)) + " slices");
  }
  MacroblockDecoder decoder(reader, ctx, picture);
  return decoder.run();
}

}  // namespace mvf::bitparse
