#include "cavlc.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <string>
#include <vector>

#include "mvf/error.hpp"

namespace mvf::bitparse::cavlc {

namespace {

// Code lengths and values of the H.264 CAVLC tables, indexed
// TotalCoeff * 4 + TrailingOnes for coeff_token.
constexpr uint8_t kCoeffTokenLen[4][4 * 17] = {
    {1, 0, 0, 0, 6, 2, 0, 0, 8, 6, 3, 0, 9, 8, 7, 5, 10, 9, 8, 6, 11, 10, 9, 7,
     13, 11, 10, 8, 13, 13, 11, 9, 13, 13, 13, 10, 14, 14, 13, 11, 14, 14, 14, 13,
     15, 15, 14, 14, 15, 15, 15, 14, 16, 15, 15, 15, 16, 16, 16, 15, 16, 16, 16, 16,
     16, 16, 16, 16},
    {2, 0, 0, 0, 6, 2, 0, 0, 6, 5, 3, 0, 7, 6, 6, 4, 8, 6, 6, 4, 8, 7, 7, 5,
     9, 8, 8, 6, 11, 9, 9, 6, 11, 11, 11, 7, 12, 11, 11, 9, 12, 12, 12, 11,
     12, 12, 12, 11, 13, 13, 13, 12, 13, 13, 13, 13, 13, 14, 13, 13, 14, 14, 14, 13,
     14, 14, 14, 14},
    {4, 0, 0, 0, 6, 4, 0, 0, 6, 5, 4, 0, 6, 5, 5, 4, 7, 5, 5, 4, 7, 5, 5, 4,
     7, 6, 6, 4, 7, 6, 6, 4, 8, 7, 7, 5, 8, 8, 7, 6, 9, 8, 8, 7,
     9, 9, 8, 8, 9, 9, 9, 8, 10, 9, 9, 9, 10, 10, 10, 10, 10, 10, 10, 10,
     10, 10, 10, 10},
    {6, 0, 0, 0, 6, 6, 0, 0, 6, 6, 6, 0, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6,
     6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6,
     6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6,
     6, 6, 6, 6},
};

constexpr uint8_t kCoeffTokenBits[4][4 * 17] = {
    {1, 0, 0, 0, 5, 1, 0, 0, 7, 4, 1, 0, 7, 6, 5, 3, 7, 6, 5, 3, 7, 6, 5, 4,
     15, 6, 5, 4, 11, 14, 5, 4, 8, 10, 13, 4, 15, 14, 9, 4, 11, 10, 13, 12,
     15, 14, 9, 12, 11, 10, 13, 8, 15, 1, 9, 12, 11, 14, 13, 8, 7, 10, 9, 12,
     4, 6, 5, 8},
    {3, 0, 0, 0, 11, 2, 0, 0, 7, 7, 3, 0, 7, 10, 9, 5, 7, 6, 5, 4, 4, 6, 5, 6,
     7, 6, 5, 8, 15, 6, 5, 4, 11, 14, 13, 4, 15, 10, 9, 4, 11, 14, 13, 12,
     8, 10, 9, 8, 15, 14, 13, 12, 11, 10, 9, 12, 7, 11, 6, 8, 9, 8, 10, 1,
     7, 6, 5, 4},
    {15, 0, 0, 0, 15, 14, 0, 0, 11, 15, 13, 0, 8, 12, 14, 12, 15, 10, 11, 11, 11, 8, 9, 10,
     9, 14, 13, 9, 8, 10, 9, 8, 15, 14, 13, 13, 11, 14, 10, 12, 15, 10, 13, 12,
     11, 14, 9, 12, 8, 10, 13, 8, 13, 7, 9, 12, 9, 12, 11, 10, 5, 8, 7, 6,
     1, 4, 3, 2},
    {3, 0, 0, 0, 0, 1, 0, 0, 4, 5, 6, 0, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19,
     20, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31, 32, 33, 34, 35, 36, 37, 38, 39,
     40, 41, 42, 43, 44, 45, 46, 47, 48, 49, 50, 51, 52, 53, 54, 55, 56, 57, 58, 59,
     60, 61, 62, 63},
};

constexpr uint8_t kChromaDcCoeffTokenLen[4 * 5] = {2, 0, 0, 0, 6, 1, 0, 0, 6, 6,
                                                   3, 0, 6, 7, 7, 6, 6, 8, 8, 7};
constexpr uint8_t kChromaDcCoeffTokenBits[4 * 5] = {1, 0, 0, 0, 7, 1, 0, 0, 4, 6,
                                                    1, 0, 3, 3, 2, 5, 2, 3, 2, 0};

// total_zeros for 4x4 blocks, indexed [TotalCoeff - 1][total_zeros].
constexpr uint8_t kTotalZerosLen[15][16] = {
    {1, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7, 8, 8, 9, 9, 9},
    {3, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 6, 6, 6, 6},
    {4, 3, 3, 3, 4, 4, 3, 3, 4, 5, 5, 6, 5, 6},
    {5, 3, 4, 4, 3, 3, 3, 4, 3, 4, 5, 5, 5},
    {4, 4, 4, 3, 3, 3, 3, 3, 4, 5, 4, 5},
    {6, 5, 3, 3, 3, 3, 3, 3, 4, 3, 6},
    {6, 5, 3, 3, 3, 2, 3, 4, 3, 6},
    {6, 4, 5, 3, 2, 2, 3, 3, 6},
    {6, 6, 4, 2, 2, 3, 2, 5},
    {5, 5, 3, 2, 2, 2, 4},
    {4, 4, 3, 3, 1, 3},
    {4, 4, 2, 1, 3},
    {3, 3, 1, 2},
    {2, 2, 1},
    {1, 1},
};

constexpr uint8_t kTotalZerosBits[15][16] = {
    {1, 3, 2, 3, 2, 3, 2, 3, 2, 3, 2, 3, 2, 3, 2, 1},
    {7, 6, 5, 4, 3, 5, 4, 3, 2, 3, 2, 3, 2, 1, 0},
    {5, 7, 6, 5, 4, 3, 4, 3, 2, 3, 2, 1, 1, 0},
    {3, 7, 5, 4, 6, 5, 4, 3, 3, 2, 2, 1, 0},
    {5, 4, 3, 7, 6, 5, 4, 3, 2, 1, 1, 0},
    {1, 1, 7, 6, 5, 4, 3, 2, 1, 1, 0},
    {1, 1, 5, 4, 3, 3, 2, 1, 1, 0},
    {1, 1, 1, 3, 3, 2, 2, 1, 0},
    {1, 0, 1, 3, 2, 1, 1, 1},
    {1, 0, 1, 3, 2, 1, 1},
    {0, 1, 1, 2, 1, 3},
    {0, 1, 1, 1, 1},
    {0, 1, 1, 1},
    {0, 1, 1},
    {0, 1},
};

constexpr uint8_t kChromaDcTotalZerosLen[3][4] = {{1, 2, 3, 3}, {1, 2, 2, 0}, {1, 1, 0, 0}};
constexpr uint8_t kChromaDcTotalZerosBits[3][4] = {{1, 1, 1, 0}, {1, 1, 0, 0}, {1, 0, 0, 0}};

// run_before indexed [min(zerosLeft, 7) - 1][run_before].
constexpr uint8_t kRunLen[7][16] = {
    {1, 1},
    {1, 2, 2},
    {2, 2, 2, 2},
    {2, 2, 2, 3, 3},
    {2, 2, 3, 3, 3, 3},
    {2, 3, 3, 3, 3, 3, 3},
    {3, 3, 3, 3, 3, 3, 3, 4, 5, 6, 7, 8, 9, 10, 11},
};
constexpr uint8_t kRunBits[7][16] = {
    {1, 0},
    {1, 1, 0},
    {3, 2, 1, 0},
    {3, 2, 1, 1, 0},
    {3, 2, 3, 2, 1, 0},
    {3, 0, 1, 3, 2, 5, 4},
    {7, 6, 5, 4, 3, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1},
};

constexpr uint8_t kGolombToIntraCbp[48] = {
    47, 31, 15, 0,  23, 27, 29, 30, 7,  11, 13, 14, 39, 43, 45, 46,
    16, 3,  5,  10, 12, 19, 21, 26, 28, 35, 37, 42, 44, 1,  2,  4,
    8,  17, 18, 20, 24, 6,  9,  22, 25, 32, 33, 34, 36, 40, 38, 41};
constexpr uint8_t kGolombToInterCbp[48] = {
    0,  16, 1,  2,  4,  8,  32, 3,  5,  10, 12, 15, 47, 7,  11, 13,
    14, 6,  9,  31, 35, 37, 42, 44, 33, 34, 36, 40, 39, 43, 45, 46,
    17, 18, 20, 24, 19, 21, 26, 28, 23, 27, 29, 30, 22, 25, 38, 41};

// Binary trie decoder for one prefix code.
class VlcTable {
 public:
  void add(int length, uint32_t code, int value) {
    int node = 0;
    for (int i = length - 1; i >= 0; --i) {
      const int bit = static_cast<int>((code >> i) & 1u);
      if (nodes_[static_cast<std::size_t>(node)].next[bit] < 0) {
        nodes_[static_cast<std::size_t>(node)].next[bit] = static_cast<int>(nodes_.size());
        nodes_.push_back(Node{});
      }
      node = nodes_[static_cast<std::size_t>(node)].next[bit];
    }
    nodes_[static_cast<std::size_t>(node)].value = value;
  }

  int decode(BitReader& reader, const char* what) const {
    int node = 0;
    for (;;) {
      const Node& n = nodes_[static_cast<std::size_t>(node)];
      if (n.value >= 0) return n.value;
      const int next = n.next[reader.read_bits(1)];
      if (next < 0) throw MalformedSlice(std::string("invalid ") + what + " code");
      node = next;
    }
  }

 private:
  struct Node {
    int next[2] = {-1, -1};
    int value = -1;
  };
  std::vector<Node> nodes_{Node{}};
};

struct Tables {
  std::array<VlcTable, 4> coeff_token;
  VlcTable chroma_dc_coeff_token;
  std::array<VlcTable, 15> total_zeros;
  std::array<VlcTable, 3> chroma_dc_total_zeros;
  std::array<VlcTable, 7> run_before;

  Tables() {
    for (int t = 0; t < 4; ++t) {
      for (int i = 0; i < 4 * 17; ++i) {
        if (kCoeffTokenLen[t][i] != 0 && (i & 3) <= (i >> 2)) {
          coeff_token[static_cast<std::size_t>(t)].add(kCoeffTokenLen[t][i], kCoeffTokenBits[t][i], i);
        }
      }
    }
    for (int i = 0; i < 4 * 5; ++i) {
      if (kChromaDcCoeffTokenLen[i] != 0) {
        chroma_dc_coeff_token.add(kChromaDcCoeffTokenLen[i], kChromaDcCoeffTokenBits[i], i);
      }
    }
    for (int tc = 0; tc < 15; ++tc) {
      for (int z = 0; z < 16 - tc; ++z) {
        total_zeros[static_cast<std::size_t>(tc)].add(kTotalZerosLen[tc][z], kTotalZerosBits[tc][z], z);
      }
    }
    for (int tc = 0; tc < 3; ++tc) {
      for (int z = 0; z < 4 - tc; ++z) {
        chroma_dc_total_zeros[static_cast<std::size_t>(tc)].add(kChromaDcTotalZerosLen[tc][z],
                                                                kChromaDcTotalZerosBits[tc][z], z);
      }
    }
    for (int zl = 0; zl < 7; ++zl) {
      const int runs = zl < 6 ? zl + 2 : 15;
      for (int run = 0; run < runs; ++run) {
        run_before[static_cast<std::size_t>(zl)].add(kRunLen[zl][run], kRunBits[zl][run], run);
      }
    }
  }
};

const Tables& tables() {
  static const Tables instance;
  return instance;
}

}  // namespace

int parse_residual_block(BitReader& reader, int nc, int max_num_coeff) {
  const Tables& t = tables();
  int token = 0;
  if (nc < 0) {
    token = t.chroma_dc_coeff_token.decode(reader, "chroma DC coeff_token");
  } else {
    const int table = nc < 2 ? 0 : nc < 4 ? 1 : nc < 8 ? 2 : 3;
    token = t.coeff_token[static_cast<std::size_t>(table)].decode(reader, "coeff_token");
  }
  const int total_coeff = token >> 2;
  const int trailing_ones = token & 3;
  if (total_coeff > max_num_coeff) throw MalformedSlice("TotalCoeff exceeds block size");
  if (total_coeff == 0) return 0;

  int suffix_length = (total_coeff > 10 && trailing_ones < 3) ? 1 : 0;
  for (int i = 0; i < total_coeff; ++i) {
    if (i < trailing_ones) {
      reader.read_bits(1);  // trailing_ones_sign_flag
      continue;
    }
    int prefix = 0;
    while (reader.read_bits(1) == 0) {
      if (++prefix > 28) throw MalformedSlice("level_prefix too long");
    }
    int64_t level_code = static_cast<int64_t>(std::min(15, prefix)) << suffix_length;
    int suffix_size = suffix_length;
    if (prefix == 14 && suffix_length == 0) suffix_size = 4;
    if (prefix >= 15) suffix_size = prefix - 3;
    if (suffix_size > 0) level_code += reader.read_bits(suffix_size);
    if (prefix >= 15 && suffix_length == 0) level_code += 15;
    if (prefix >= 16) level_code += (int64_t{1} << (prefix - 3)) - 4096;
    if (i == trailing_ones && trailing_ones < 3) level_code += 2;
    const int64_t level = (level_code % 2 == 0) ? (level_code + 2) >> 1 : (-level_code - 1) >> 1;
    if (suffix_length == 0) suffix_length = 1;
    if (std::llabs(level) > (int64_t{3} << (suffix_length - 1)) && suffix_length < 6) ++suffix_length;
  }

  int zeros_left = 0;
  if (total_coeff < max_num_coeff) {
    if (max_num_coeff == 4) {
      zeros_left = t.chroma_dc_total_zeros[static_cast<std::size_t>(total_coeff - 1)].decode(reader, "total_zeros");
    } else {
      zeros_left = t.total_zeros[static_cast<std::size_t>(total_coeff - 1)].decode(reader, "total_zeros");
    }
    if (zeros_left > max_num_coeff - total_coeff) throw MalformedSlice("total_zeros exceeds block size");
  }
  for (int i = 0; i < total_coeff - 1 && zeros_left > 0; ++i) {
    const int run = t.run_before[static_cast<std::size_t>(std::min(zeros_left, 7) - 1)].decode(reader, "run_before");
    if (run > zeros_left) throw MalformedSlice("run_before exceeds zerosLeft");
    zeros_left -= run;
  }
  return total_coeff;
}

int decode_cbp(uint32_t code_num, bool intra) {
  if (code_num > 47) throw MalformedSlice("coded_block_pattern code " + std::to_string(code_num));
  return intra ? kGolombToIntraCbp[code_num] : kGolombToInterCbp[code_num];
}

}  // namespace mvf::bitparse::cavlc
