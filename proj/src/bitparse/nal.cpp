#include "mvf/bitparse/nal.hpp"

#include <string>

#include "mvf/error.hpp"

namespace mvf::bitparse {

namespace {

// Returns the index just past the next 00 00 01 at or after `from`, or npos.
std::size_t find_start_code(std::span<const uint8_t> s, std::size_t from) {
  for (std::size_t i = from; i + 2 < s.size(); ++i) {
    if (s[i + 2] > 1) {
      i += 2;
      continue;
    }
    if (s[i] == 0 && s[i + 1] == 0 && s[i + 2] == 1) return i + 3;
  }
  return std::span<const uint8_t>::extent;
}

}  // namespace

std::vector<uint8_t> unescape_rbsp(std::span<const uint8_t> payload) {
  std::vector<uint8_t> out;
  out.reserve(payload.size());
  int zeros = 0;
  for (uint8_t byte : payload) {
    if (zeros >= 2 && byte == 0x03) {
      zeros = 0;
      continue;
    }
    out.push_back(byte);
    zeros = byte == 0 ? zeros + 1 : 0;
  }
  return out;
}

std::vector<uint8_t> escape_rbsp(std::span<const uint8_t> rbsp) {
  std::vector<uint8_t> out;
  out.reserve(rbsp.size() + rbsp.size() / 64 + 1);
  int zeros = 0;
  for (uint8_t byte : rbsp) {
    if (zeros >= 2 && byte <= 0x03) {
      out.push_back(0x03);
      zeros = 0;
    }
    out.push_back(byte);
    zeros = byte == 0 ? zeros + 1 : 0;
  }
  // A payload may not end in 0x00; that only happens for cabac_zero_words.
  if (!out.empty() && out.back() == 0) out.push_back(0x03);
  return out;
}

std::vector<NalUnit> split_annexb(std::span<const uint8_t> stream) {
  std::vector<NalUnit> units;
  constexpr std::size_t npos = std::span<const uint8_t>::extent;
  std::size_t start = find_start_code(stream, 0);
  while (start != npos) {
    std::size_t next = find_start_code(stream, start);
    std::size_t end = next == npos ? stream.size() : next - 3;
    // trailing_zero_8bits and the leading zero of a 4-byte start code
    while (end > start && stream[end - 1] == 0) --end;
    if (start >= stream.size() || end == start) {
      if (next == npos) {
        throw TruncatedStream("stream ends inside NAL header at byte " + std::to_string(start));
      }
      start = next;
      continue;
    }
    const uint8_t header = stream[start];
    if (header & 0x80) {
      throw MalformedHeader("forbidden_zero_bit set in NAL at byte " + std::to_string(start));
    }
    NalUnit unit;
    unit.ref_idc = (header >> 5) & 3;
    unit.unit_type = header & 31;
    unit.stream_offset = start;
    unit.rbsp = unescape_rbsp(stream.subspan(start + 1, end - start - 1));
    units.push_back(std::move(unit));
    start = next;
  }
  return units;
}

std::vector<uint8_t> make_annexb_nal(int ref_idc, int unit_type, std::span<const uint8_t> rbsp) {
  std::vector<uint8_t> out = {0, 0, 0, 1, static_cast<uint8_t>(((ref_idc & 3) << 5) | (unit_type & 31))};
  const auto escaped = escape_rbsp(rbsp);
  out.insert(out.end(), escaped.begin(), escaped.end());
  return out;
}

}  // namespace mvf::bitparse
