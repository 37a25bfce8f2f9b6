#include "doctest.h"
#include "mvf/bitparse/macroblock.hpp"
#include "mvf/bitparse/nal.hpp"
#include "mvf/bitparse/stream.hpp"

using namespace mvf;
using namespace mvf::bitparse;

namespace {

MvNeighbor nb(int x, int y, int ref = 0) { return MvNeighbor{true, ref, Mv{x, y}}; }
const MvNeighbor kNone{};

// Minimal baseline stream: a 2x2-macroblock IDR picture of I_PCM macroblocks
// followed by P pictures whose slice data the caller supplies.
struct TinyEncoder {
  SeqParamSet sps;
  PicParamSet pps;
  std::vector<uint8_t> stream;
  uint32_t frame_num = 0;

  TinyEncoder() {
    sps.pic_width_in_mbs = 2;
    sps.pic_height_in_map_units = 2;
    sps.max_num_ref_frames = 2;
    append(make_annexb_nal(3, kNalSps, write_sps(sps)));
    append(make_annexb_nal(3, kNalPps, write_pps(pps)));
  }

  void append(const std::vector<uint8_t>& bytes) { stream.insert(stream.end(), bytes.begin(), bytes.end()); }

  SliceHeader header(SliceType type, bool idr) {
    SliceHeader h;
    h.idr = idr;
    h.nal_ref_idc = 3;
    h.nal_unit_type = idr ? kNalSliceIdr : kNalSliceNonIdr;
    h.slice_type = type;
    h.frame_num = frame_num;
    h.pic_order_cnt_lsb = (2 * frame_num) % 16;
    h.num_ref_idx_l0 = pps.num_ref_idx_default_l0;
    return h;
  }

  void idr_pcm() {
    frame_num = 0;
    BitWriter w;
    write_slice_header(w, header(SliceType::kI, true), sps, pps);
    for (int mb = 0; mb < 4; ++mb) {
      w.write_ue(25);
      w.align_zero();
      for (int i = 0; i < 384; ++i) w.write_bits(static_cast<uint32_t>((i * 7 + mb) & 0xFF), 8);
    }
    w.write_trailing_bits();
    append(make_annexb_nal(3, kNalSliceIdr, w.bytes()));
  }

  template <typename Body>
  void p_frame(int num_ref_idx, Body body) {
    ++frame_num;
    BitWriter w;
    SliceHeader h = header(SliceType::kP, false);
    h.num_ref_idx_l0 = num_ref_idx;
    write_slice_header(w, h, sps, pps);
    body(w);
    w.write_trailing_bits();
    append(make_annexb_nal(2, kNalSliceNonIdr, w.bytes()));
  }
};

}  // namespace

TEST_CASE("median of identical neighbours") {
  CHECK(predict_mv(nb(4, -8), nb(4, -8), nb(4, -8), kNone, 0, PartitionShape::kDefault) == Mv{4, -8});
}

TEST_CASE("componentwise median") {
  CHECK(median(Mv{0, 0}, Mv{10, 2}, Mv{4, 4}) == Mv{4, 2});
  CHECK(predict_mv(nb(0, 0), nb(10, 2), nb(4, 4), kNone, 0, PartitionShape::kDefault) == Mv{4, 2});
}

TEST_CASE("left-edge macroblock with only the top row available") {
  // A and D are outside the picture, C is available: both B and C match the
  // reference index, so the median runs over (0, B, C).
  CHECK(predict_mv(kNone, nb(6, 2), nb(10, -4), kNone, 0, PartitionShape::kDefault) == Mv{6, 0});
  // Right-edge variant: C missing, D substitutes; only B shares the index.
  CHECK(predict_mv(kNone, nb(6, 2), kNone, nb(1, 1, 1), 0, PartitionShape::kDefault) == Mv{6, 2});
}

TEST_CASE("only A available: B and C take A's motion") {
  CHECK(predict_mv(nb(3, -5), kNone, kNone, kNone, 0, PartitionShape::kDefault) == Mv{3, -5});
}

TEST_CASE("single matching reference index wins over the median") {
  CHECK(predict_mv(nb(1, 1, 1), nb(8, 8, 0), nb(2, 2, 1), kNone, 0, PartitionShape::kDefault) == Mv{8, 8});
}

TEST_CASE("directional rules for 16x8 and 8x16") {
  const MvNeighbor a = nb(1, 1);
  const MvNeighbor b = nb(20, 20);
  const MvNeighbor c = nb(-7, 3);
  CHECK(predict_mv(a, b, c, kNone, 0, PartitionShape::k16x8Top) == Mv{20, 20});
  CHECK(predict_mv(a, b, c, kNone, 0, PartitionShape::k16x8Bottom) == Mv{1, 1});
  CHECK(predict_mv(a, b, c, kNone, 0, PartitionShape::k8x16Left) == Mv{1, 1});
  CHECK(predict_mv(a, b, c, kNone, 0, PartitionShape::k8x16Right) == Mv{-7, 3});
  // Directional neighbour with another reference falls back to the median.
  CHECK(predict_mv(a, nb(20, 20, 1), c, kNone, 0, PartitionShape::k16x8Top) == Mv{1, 3});
}

TEST_CASE("P_Skip motion is zero at edges and for zero neighbours") {
  CHECK(predict_skip_mv(kNone, nb(5, 5), nb(5, 5), kNone) == Mv{0, 0});
  CHECK(predict_skip_mv(nb(5, 5), kNone, kNone, kNone) == Mv{0, 0});
  CHECK(predict_skip_mv(nb(0, 0), nb(5, 5), nb(5, 5), kNone) == Mv{0, 0});
  CHECK(predict_skip_mv(nb(5, 5), nb(5, 5), nb(5, 5), kNone) == Mv{5, 5});
  CHECK(predict_skip_mv(nb(5, 5), nb(0, 0, 1), nb(2, 2), kNone) == Mv{2, 2});
}

TEST_CASE("synthetic stream: I_PCM picture then skipped and coded P pictures") {
  TinyEncoder enc;
  enc.idr_pcm();
  enc.p_frame(1, [](BitWriter& w) { w.write_ue(4); });
  enc.p_frame(1, [](BitWriter& w) {
    for (int mb = 0; mb < 4; ++mb) {
      w.write_ue(0);                 // mb_skip_run
      w.write_ue(0);                 // P_L0_16x16
      w.write_se(mb == 0 ? 4 : 0);   // mvd_x
      w.write_se(mb == 0 ? -8 : 0);  // mvd_y
      w.write_ue(0);                 // coded_block_pattern 0
    }
  });
  // Two references: te(v) ref_idx is a single inverted bit.
  enc.p_frame(2, [](BitWriter& w) {
    w.write_ue(0);
    w.write_ue(0);
    w.write_te(1, 1);
    w.write_se(-2);
    w.write_se(6);
    w.write_ue(0);
    w.write_ue(3);
  });

  ParsedStream parsed = parse_stream(enc.stream);
  CHECK(parsed.issues.empty());
  REQUIRE(parsed.frames.size() == 4);
  CHECK(parsed.frames[0].type == FrameType::kI);
  for (const auto& mb : parsed.frames[0].macroblocks) CHECK(mb.kind == MbKind::kIntra);

  for (const auto& mb : parsed.frames[1].macroblocks) {
    CHECK(mb.kind == MbKind::kSkip);
    REQUIRE(mb.partitions.size() == 1);
    CHECK(mb.partitions[0].mv_x == 0);
    CHECK(mb.partitions[0].mv_y == 0);
    CHECK(mb.partitions[0].ref_offset == -1);
  }

  for (const auto& mb : parsed.frames[2].macroblocks) {
    CAPTURE(mb.mb_addr);
    CHECK(mb.kind == MbKind::kInter);
    REQUIRE(mb.partitions.size() == 1);
    CHECK(mb.partitions[0].mv_x == 4);
    CHECK(mb.partitions[0].mv_y == -8);
    CHECK(mb.partitions[0].x0 == (mb.mb_addr % 2) * 16);
    CHECK(mb.partitions[0].y0 == (mb.mb_addr / 2) * 16);
  }

  const auto& last = parsed.frames[3].macroblocks;
  CHECK(last[0].kind == MbKind::kInter);
  CHECK(last[0].partitions[0].ref_offset == -2);
  CHECK(last[0].partitions[0].mv_x == -2);
  CHECK(last[0].partitions[0].mv_y == 6);
  // Top row: B is outside the picture, so P_Skip motion is zero even though A
  // carries motion.
  for (int addr = 1; addr < 4; ++addr) {
    CHECK(last[addr].kind == MbKind::kSkip);
    CHECK(last[addr].partitions[0].ref_offset == -1);
    CHECK(last[addr].partitions[0].mv_x == 0);
    CHECK(last[addr].partitions[0].mv_y == 0);
  }
}

TEST_CASE("slice ending early leaves macroblocks undecoded and reports desync") {
  TinyEncoder enc;
  enc.idr_pcm();
  enc.p_frame(1, [](BitWriter& w) { w.write_ue(2); });
  ParsedStream parsed = parse_stream(enc.stream);
  REQUIRE(parsed.frames.size() == 2);
  CHECK(parsed.frames[1].undecoded_macroblocks == 2);
  REQUIRE(parsed.issues.size() == 1);
  CHECK(parsed.issues[0].kind == ErrorKind::kBitstreamDesync);
}

TEST_CASE("partitions of every inter macroblock tile 16x16") {
  TinyEncoder enc;
  enc.idr_pcm();
  enc.p_frame(1, [](BitWriter& w) {
    w.write_ue(0);
    w.write_ue(3);  // P_8x8
    for (int i = 0; i < 4; ++i) w.write_ue(static_cast<uint32_t>(i));  // 8x8, 8x4, 4x8, 4x4
    const int mvds = 1 + 2 + 2 + 4;
    for (int i = 0; i < mvds; ++i) {
      w.write_se(i);
      w.write_se(-i);
    }
    w.write_ue(0);
    w.write_ue(3);
  });
  ParsedStream parsed = parse_stream(enc.stream);
  CHECK(parsed.issues.empty());
  REQUIRE(parsed.frames.size() == 2);
  const auto& mb = parsed.frames[1].macroblocks[0];
  CHECK(mb.partitions.size() == 9);
  int area = 0;
  for (const auto& p : mb.partitions) area += p.w * p.h;
  CHECK(area == 256);
}
