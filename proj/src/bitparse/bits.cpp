#include "mvf/bitparse/bits.hpp"

#include <string>

#include "mvf/error.hpp"

namespace mvf::bitparse {

BitReader::BitReader(std::span<const uint8_t> data)
    : data_(data), size_(data.size() * 8) {
  stop_bit_ = size_;
  for (std::size_t i = data_.size(); i-- > 0;) {
    const uint8_t byte = data_[i];
    if (byte == 0) continue;
    int bit = 0;
    while (((byte >> bit) & 1) == 0) ++bit;
    stop_bit_ = i * 8 + static_cast<std::size_t>(7 - bit);
    break;
  }
}

uint32_t BitReader::read_bits(int count) {
  const uint32_t value = peek_bits(count);
  pos_ += static_cast<std::size_t>(count);
  return value;
}

uint32_t BitReader::peek_bits(int count) const {
  if (count < 0 || count > 32) throw OutOfBits("invalid bit count");
  if (static_cast<std::size_t>(count) > size_ - pos_) {
    throw OutOfBits("read of " + std::to_string(count) + " bits at offset " +
                    std::to_string(pos_) + " past end of " +
                    std::to_string(size_) + "-bit buffer");
  }
  uint32_t value = 0;
  std::size_t p = pos_;
  for (int i = 0; i < count; ++i, ++p) {
    value = (value << 1) | ((data_[p >> 3] >> (7 - (p & 7))) & 1u);
  }
  return value;
}

void BitReader::skip_bits(std::size_t count) {
  if (count > size_ - pos_) throw OutOfBits("skip past end of buffer");
  pos_ += count;
}

uint32_t BitReader::read_ue() {
  int leading_zeros = 0;
  while (read_bits(1) == 0) {
    if (++leading_zeros > 31) throw OutOfBits("exp-Golomb prefix longer than 31 bits");
  }
  if (leading_zeros == 0) return 0;
  const uint64_t suffix = read_bits(leading_zeros);
  return static_cast<uint32_t>((uint64_t{1} << leading_zeros) - 1 + suffix);
}

int32_t BitReader::read_se() {
  const uint32_t code = read_ue();
  const int64_t magnitude = (static_cast<int64_t>(code) + 1) / 2;
  return static_cast<int32_t>((code & 1) ? magnitude : -magnitude);
}

uint32_t BitReader::read_te(uint32_t range) {
  if (range == 1) return read_flag() ? 0u : 1u;
  return read_ue();
}

bool BitReader::more_rbsp_data() const { return pos_ < stop_bit_; }

void BitWriter::write_bits(uint32_t value, int count) {
  for (int i = count - 1; i >= 0; --i) {
    if ((bit_count_ & 7) == 0) bytes_.push_back(0);
    if ((value >> i) & 1u) bytes_.back() |= static_cast<uint8_t>(0x80u >> (bit_count_ & 7));
    ++bit_count_;
  }
}

void BitWriter::write_ue(uint32_t value) {
  const uint64_t code = static_cast<uint64_t>(value) + 1;
  int bits = 0;
  while ((code >> bits) > 1) ++bits;
  write_bits(0, bits);
  // The leading one plus `bits` suffix bits; split to stay within 32.
  write_bits(1, 1);
  if (bits > 0) write_bits(static_cast<uint32_t>(code & ((uint64_t{1} << bits) - 1)), bits);
}

void BitWriter::write_se(int32_t value) {
  const int64_t v = value;
  write_ue(static_cast<uint32_t>(v > 0 ? 2 * v - 1 : -2 * v));
}

void BitWriter::write_te(uint32_t value, uint32_t range) {
  if (range == 1) {
    write_flag(value == 0);
  } else {
    write_ue(value);
  }
}

void BitWriter::write_trailing_bits() {
  write_bits(1, 1);
  align_zero();
}

void BitWriter::align_zero() {
  while (!byte_aligned()) write_bits(0, 1);
}

RawBits capture_remaining(const BitReader& reader) {
  BitReader copy = reader;
  BitWriter writer;
  std::size_t left = copy.bits_left();
  while (left > 0) {
    const int chunk = static_cast<int>(left > 32 ? 32 : left);
    writer.write_bits(copy.read_bits(chunk), chunk);
    left -= static_cast<std::size_t>(chunk);
  }
  return RawBits{writer.bytes(), writer.bit_count()};
}

void append_bits(BitWriter& writer, const RawBits& bits) {
  BitReader reader(bits.bytes);
  std::size_t left = bits.count;
  while (left > 0) {
    const int chunk = static_cast<int>(left > 32 ? 32 : left);
    writer.write_bits(reader.read_bits(chunk), chunk);
    left -= static_cast<std::size_t>(chunk);
  }
}

}  // namespace mvf::bitparse
