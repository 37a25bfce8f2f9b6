#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mvf::bitparse {

enum NalType : int {
  kNalSliceNonIdr = 1,
  kNalSliceDataPartitionA = 2,
  kNalSliceIdr = 5,
  kNalSei = 6,
  kNalSps = 7,
  kNalPps = 8,
  kNalAccessUnitDelimiter = 9,
};

struct NalUnit {
  int ref_idc = 0;    // 0..3
  int unit_type = 0;  // 0..31
  std::vector<uint8_t> rbsp;  // emulation-prevention bytes removed
  std::size_t stream_offset = 0;  // byte offset of the NAL header in the stream
};

// Splits an Annex-B byte stream on 3- and 4-byte start codes. Bytes before the
// first start code are ignored. Throws TruncatedStream when a start code is
// the last thing in the stream, MalformedHeader on a set forbidden_zero_bit.
std::vector<NalUnit> split_annexb(std::span<const uint8_t> stream);

// Removes 0x03 from every 0x00 0x00 0x03 sequence.
std::vector<uint8_t> unescape_rbsp(std::span<const uint8_t> payload);

// Inverse of unescape_rbsp: inserts emulation-prevention bytes.
std::vector<uint8_t> escape_rbsp(std::span<const uint8_t> rbsp);

// Header byte + escaped payload prefixed with a 4-byte start code.
std::vector<uint8_t> make_annexb_nal(int ref_idc, int unit_type, std::span<const uint8_t> rbsp);

}  // namespace mvf::bitparse
