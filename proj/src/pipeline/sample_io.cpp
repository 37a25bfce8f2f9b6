#include "mvf/pipeline/sample_io.hpp"

#include "mvf/error.hpp"
#include "mvf/ingest/binary.hpp"
#include "mvf/ingest/fileio.hpp"

namespace mvf::pipeline {

namespace {

constexpr std::string_view kMagic = "MVSAMPLE";
constexpr uint32_t kVersion = 1;
constexpr int kMaxDim = 1 << 14;
constexpr uint32_t kMaxChannels = 64;

}  // namespace

std::vector<uint8_t> serialize_samples(const SampleCache& cache) {
  if (cache.frame_indices.size() != cache.samples.size()) throw ShapeMismatch("one frame index per sample required");
  ingest::ByteWriter out;
  out.bytes(kMagic);
  out.u32(kVersion);
  out.u8(static_cast<uint8_t>(cache.config.modality));
  out.i32(cache.config.input_res);
  out.u8(cache.config.past_only ? 1 : 0);
  out.u32(static_cast<uint32_t>(cache.samples.size()));
  for (std::size_t i = 0; i < cache.samples.size(); ++i) {
    const SampleTensor& s = cache.samples[i];
    const auto c = static_cast<std::size_t>(s.channels());
    if (s.kinds.size() != c || s.mask_of.size() != c || s.degenerate.size() != c) {
      throw ShapeMismatch("sample channel metadata does not match its tensor");
    }
    out.i32(cache.frame_indices[i]);
    out.u32(static_cast<uint32_t>(c));
    out.i32(s.values.height);
    out.i32(s.values.width);
    for (std::size_t ch = 0; ch < c; ++ch) {
      out.u8(static_cast<uint8_t>(s.kinds[ch]));
      out.i32(s.mask_of[ch]);
      out.u8(s.degenerate[ch]);
    }
    out.f32s(s.values.data);
  }
  return out.data();
}

SampleCache parse_samples(std::span<const uint8_t> bytes) {
  ingest::ByteReader in(bytes);
  if (in.remaining() < kMagic.size() || in.bytes(kMagic.size()) != kMagic) throw BadMagic("not a sample cache (MVSAMPLE expected)");
  if (const uint32_t v = in.u32(); v != kVersion) throw FormatError("unsupported sample cache version " + std::to_string(v));
  SampleCache cache;
  const uint8_t modality = in.u8();
  if (modality > static_cast<uint8_t>(Modality::kRgbMvIm)) throw FormatError("unknown modality code");
  cache.config.modality = static_cast<Modality>(modality);
  cache.config.input_res = in.i32();
  if (cache.config.input_res < 1 || cache.config.input_res > kMaxDim) throw FormatError("input_res out of range");
  const uint8_t past_only = in.u8();
  if (past_only > 1) throw FormatError("past_only must be 0 or 1");
  cache.config.past_only = past_only == 1;
  const uint32_t count = in.u32();
  // Smallest possible sample is its 16-byte header.
  if (count > in.remaining() / 16) throw TruncatedFile("sample count exceeds file size");
  for (uint32_t i = 0; i < count; ++i) {
    cache.frame_indices.push_back(in.i32());
    const uint32_t channels = in.u32();
    const int h = in.i32();
    const int w = in.i32();
    if (channels < 1 || channels > kMaxChannels) throw FormatError("channel count out of range");
    if (h < 1 || w < 1 || h > kMaxDim || w > kMaxDim) throw FormatError("sample size out of range");
    SampleTensor s;
    for (uint32_t ch = 0; ch < channels; ++ch) {
      const uint8_t kind = in.u8();
      if (kind > static_cast<uint8_t>(ChannelKind::kIm)) throw FormatError("unknown channel kind");
      const int mask = in.i32();
      if (mask < -1 || mask >= static_cast<int>(channels)) throw FormatError("mask channel out of range");
      const uint8_t degenerate = in.u8();
      if (degenerate > 1) throw FormatError("degenerate flag must be 0 or 1");
      s.kinds.push_back(static_cast<ChannelKind>(kind));
      s.mask_of.push_back(mask);
      s.degenerate.push_back(degenerate);
    }
    const std::size_t values = static_cast<std::size_t>(channels) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    if (values > in.remaining() / 4) throw TruncatedFile("sample data exceeds file size");
    s.values = Tensor(static_cast<int>(channels), h, w);
    in.f32s(s.values.data);
    cache.samples.push_back(std::move(s));
  }
  if (in.remaining() != 0) throw FormatError("trailing bytes after the last sample");
  return cache;
}

void write_samples(const std::filesystem::path& path, const SampleCache& cache) {
  const auto bytes = serialize_samples(cache);
  ingest::write_file_bytes(path, bytes.data(), bytes.size());
}

SampleCache read_samples(const std::filesystem::path& path) { return parse_samples(ingest::read_file_bytes(path)); }

}  // namespace mvf::pipeline
