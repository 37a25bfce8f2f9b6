#include <random>

#include "doctest.h"
#include "mvf/bitparse/nal.hpp"
#include "mvf/error.hpp"
#include "mvf/ingest/fileio.hpp"
#include "reference_mvs.hpp"

using namespace mvf;
using namespace mvf::bitparse;

TEST_CASE("empty stream has no NAL units") {
  CHECK(split_annexb({}).empty());
}

TEST_CASE("4-byte start code with an SPS header") {
  const std::vector<uint8_t> bytes = {0x00, 0x00, 0x00, 0x01, 0x67, 0x42};
  auto nals = split_annexb(bytes);
  REQUIRE(nals.size() == 1);
  CHECK(nals[0].unit_type == 7);
  CHECK(nals[0].ref_idc == 3);
  CHECK(nals[0].rbsp == std::vector<uint8_t>{0x42});
}

TEST_CASE("3- and 4-byte start codes mix") {
  const std::vector<uint8_t> bytes = {0x00, 0x00, 0x01, 0x68, 0xCE, 0x00, 0x00, 0x00, 0x01, 0x65, 0x88, 0x00, 0x00, 0x01, 0x41, 0x9A};
  auto nals = split_annexb(bytes);
  REQUIRE(nals.size() == 3);
  CHECK(nals[0].unit_type == 8);
  CHECK(nals[0].rbsp == std::vector<uint8_t>{0xCE});
  CHECK(nals[1].unit_type == 5);
  CHECK(nals[1].stream_offset == 9);
  CHECK(nals[2].unit_type == 1);
  CHECK(nals[2].ref_idc == 2);
}

TEST_CASE("emulation prevention is removed") {
  const std::vector<uint8_t> payload = {0x00, 0x00, 0x03, 0x00};
  CHECK(unescape_rbsp(payload) == std::vector<uint8_t>{0x00, 0x00, 0x00});
  const std::vector<uint8_t> stream = {0x00, 0x00, 0x01, 0x06, 0x05, 0x00, 0x00, 0x03, 0x01, 0x80};
  auto nals = split_annexb(stream);
  REQUIRE(nals.size() == 1);
  CHECK(nals[0].rbsp == std::vector<uint8_t>{0x05, 0x00, 0x00, 0x01, 0x80});
}

TEST_CASE("a start code ending the stream is truncation") {
  const std::vector<uint8_t> bytes = {0x00, 0x00, 0x01, 0x67, 0x42, 0x00, 0x00, 0x01};
  CHECK_THROWS_AS(split_annexb(bytes), TruncatedStream);
}

TEST_CASE("forbidden_zero_bit set is rejected") {
  const std::vector<uint8_t> bytes = {0x00, 0x00, 0x01, 0xE7, 0x42};
  CHECK_THROWS_AS(split_annexb(bytes), MalformedHeader);
}

TEST_CASE("escaped payloads never contain start-code prefixes and roundtrip") {
  std::mt19937 rng(3);
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<uint8_t> rbsp(rng() % 64);
    for (auto& b : rbsp) b = static_cast<uint8_t>(rng() % 4 == 0 ? rng() % 4 : rng());
    if (!rbsp.empty() && rbsp.back() == 0) rbsp.back() = 0x80;
    auto escaped = escape_rbsp(rbsp);
    for (std::size_t i = 2; i < escaped.size(); ++i) {
      CHECK_FALSE((escaped[i - 2] == 0 && escaped[i - 1] == 0 && escaped[i] <= 2));
    }
    CHECK(unescape_rbsp(escaped) == rbsp);
    auto nal = make_annexb_nal(1, 1, rbsp);
    auto parsed = split_annexb(nal);
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].rbsp == rbsp);
  }
}

TEST_CASE("fixture stream NAL sequence") {
  auto bytes = ingest::read_file_bytes(testing::fixture_dir() / "streams" / "static_64x64.h264");
  auto nals = split_annexb(bytes);
  REQUIRE(nals.size() == 11);
  CHECK(nals[0].unit_type == kNalSps);
  CHECK(nals[1].unit_type == kNalPps);
  CHECK(nals[2].unit_type == kNalSei);
  CHECK(nals[3].unit_type == kNalSliceIdr);
  for (std::size_t i = 4; i < nals.size(); ++i) CHECK(nals[i].unit_type == kNalSliceNonIdr);
}
