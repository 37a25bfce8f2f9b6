#include <random>
#include <string>

#include "doctest.h"
#include "mvf/bitparse/bits.hpp"
#include "mvf/error.hpp"

using namespace mvf;
using namespace mvf::bitparse;

namespace {

// Independent exp-Golomb encoder working on '0'/'1' strings.
std::string ue_bits(uint32_t value) {
  const uint64_t v = uint64_t{value} + 1;
  std::string bin;
  for (uint64_t x = v; x > 0; x >>= 1) bin.insert(bin.begin(), static_cast<char>('0' + (x & 1)));
  return std::string(bin.size() - 1, '0') + bin;
}

std::string se_bits(int32_t value) {
  const int64_t v = value;
  return ue_bits(static_cast<uint32_t>(v > 0 ? 2 * v - 1 : -2 * v));
}

std::vector<uint8_t> pack(const std::string& bits) {
  std::vector<uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') out[i / 8] |= static_cast<uint8_t>(0x80 >> (i % 8));
  }
  return out;
}

}  // namespace

TEST_CASE("ue examples") {
  auto one = pack("1");
  CHECK(BitReader(one).read_ue() == 0);
  auto b = pack("010");
  CHECK(BitReader(b).read_ue() == 1);
  auto c = pack("00100");
  CHECK(BitReader(c).read_ue() == 3);
  auto d = pack("011");
  CHECK(BitReader(d).read_se() == -1);
}

TEST_CASE("se maps code numbers 1..4 to +1 -1 +2 -2") {
  const int expected[] = {0, 1, -1, 2, -2};
  for (uint32_t code = 0; code < 5; ++code) {
    auto bytes = pack(ue_bits(code));
    CHECK(BitReader(bytes).read_se() == expected[code]);
  }
}

TEST_CASE("exp-Golomb reader and writer agree with the string oracle") {
  std::mt19937_64 rng(7);
  std::string bits;
  std::vector<int64_t> values;
  for (int i = 0; i < 2000; ++i) {
    const int shift = static_cast<int>(rng() % 32);
    if (i % 2 == 0) {
      const uint32_t v = static_cast<uint32_t>(rng() >> (32 + shift));
      bits += ue_bits(v);
      values.push_back(v);
    } else {
      const int s = shift % 30;
      int32_t v = static_cast<int32_t>(static_cast<int64_t>(rng() >> (34 + s)) - (int64_t{1} << (29 - s)));
      bits += se_bits(v);
      values.push_back(v);
    }
  }
  auto bytes = pack(bits);
  BitReader reader(bytes);
  BitWriter writer;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i % 2 == 0) {
      CHECK(reader.read_ue() == values[i]);
      writer.write_ue(static_cast<uint32_t>(values[i]));
    } else {
      CHECK(reader.read_se() == values[i]);
      writer.write_se(static_cast<int32_t>(values[i]));
    }
  }
  CHECK(reader.position() == bits.size());
  CHECK(writer.bit_count() == bits.size());
  writer.align_zero();
  CHECK(writer.bytes() == bytes);
}

TEST_CASE("largest ue value roundtrips") {
  BitWriter w;
  w.write_ue(0xFFFFFFFEu);
  w.align_zero();
  BitReader r(w.bytes());
  CHECK(r.read_ue() == 0xFFFFFFFEu);
}

TEST_CASE("codes running past the buffer raise OutOfBits") {
  auto zeros = pack("00000000");
  CHECK_THROWS_AS(BitReader(zeros).read_ue(), OutOfBits);
  auto cut = pack("0001");  // prefix of 3 promises 3 more bits than remain
  BitReader r(std::span<const uint8_t>(cut.data(), 1));
  r.skip_bits(4);
  CHECK_THROWS_AS(r.read_ue(), OutOfBits);
  BitReader empty;
  CHECK_THROWS_AS(empty.read_bits(1), OutOfBits);
}

TEST_CASE("te with range 1 is an inverted flag") {
  auto bytes = pack("01");
  BitReader r(bytes);
  CHECK(r.read_te(1) == 1);
  CHECK(r.read_te(1) == 0);
  auto wide = pack(ue_bits(5));
  CHECK(BitReader(wide).read_te(7) == 5);
}

TEST_CASE("more_rbsp_data stops at the trailing stop bit") {
  BitWriter w;
  w.write_ue(2);
  w.write_trailing_bits();
  BitReader r(w.bytes());
  CHECK(r.more_rbsp_data());
  r.read_ue();
  CHECK_FALSE(r.more_rbsp_data());
}

TEST_CASE("RawBits capture and append preserve unaligned tails") {
  BitWriter w;
  w.write_bits(0b101, 3);
  w.write_bits(0x2AB, 10);
  w.write_trailing_bits();
  BitReader r(w.bytes());
  r.read_bits(3);
  RawBits tail = capture_remaining(r);
  CHECK(tail.count == w.bit_count() - 3);
  BitWriter out;
  out.write_bits(0b101, 3);
  append_bits(out, tail);
  CHECK(out.bytes() == w.bytes());
}
