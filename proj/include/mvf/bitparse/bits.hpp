#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mvf::bitparse {

// MSB-first bit cursor over an RBSP. All reads are bounds checked and throw
// OutOfBits instead of touching memory past the buffer.
class BitReader {
 public:
  BitReader() = default;
  explicit BitReader(std::span<const uint8_t> data);

  uint32_t read_bits(int count);
  bool read_flag() { return read_bits(1) != 0; }
  uint32_t peek_bits(int count) const;
  void skip_bits(std::size_t count);

  // Exp-Golomb codes: ue(v) and se(v).
  uint32_t read_ue();
  int32_t read_se();
  // te(v) with the given maximum value (range > 1 decodes as ue).
  uint32_t read_te(uint32_t range);

  bool byte_aligned() const { return (pos_ & 7) == 0; }
  std::size_t position() const { return pos_; }
  std::size_t size_bits() const { return size_; }
  std::size_t bits_left() const { return size_ - pos_; }

  // True while payload bits remain before the rbsp_stop_one_bit.
  bool more_rbsp_data() const;

 private:
  std::span<const uint8_t> data_;
  std::size_t pos_ = 0;
  std::size_t size_ = 0;
  // Bit index of the rbsp_stop_one_bit, or size_ when none was found.
  std::size_t stop_bit_ = 0;
};

class BitWriter {
 public:
  void write_bits(uint32_t value, int count);
  void write_flag(bool value) { write_bits(value ? 1u : 0u, 1); }
  void write_ue(uint32_t value);
  void write_se(int32_t value);
  void write_te(uint32_t value, uint32_t range);
  // rbsp_stop_one_bit followed by alignment zeros.
  void write_trailing_bits();
  void align_zero();

  bool byte_aligned() const { return (bit_count_ & 7) == 0; }
  std::size_t bit_count() const { return bit_count_; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
  std::size_t bit_count_ = 0;
};

// Bit-level copy of [begin, end) from a reader's buffer; used to keep
// unparsed header tails for bit-exact re-serialization.
struct RawBits {
  std::vector<uint8_t> bytes;
  std::size_t count = 0;

  bool operator==(const RawBits&) const = default;
};

RawBits capture_remaining(const BitReader& reader);
void append_bits(BitWriter& writer, const RawBits& bits);

}  // namespace mvf::bitparse
