#include "mvf/ingest/binary.hpp"
#include "mvf/ingest/fileio.hpp"
#include "mvf/net/model.hpp"

namespace mvf::net {

namespace {

constexpr std::string_view kMagic = "MVLITENT";
constexpr uint32_t kVersion = 1;
constexpr uint64_t kMaxBlock = uint64_t{1} << 28;

}  // namespace

std::vector<uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  ingest::ByteWriter out;
  out.bytes(kMagic);
  out.u32(kVersion);
  out.u8(static_cast<uint8_t>(ckpt.arch.kind));
  out.u8(static_cast<uint8_t>(ckpt.arch.modality));
  out.i32(ckpt.arch.input_res);
  out.u8(ckpt.arch.past_only ? 1 : 0);
  out.u32(static_cast<uint32_t>(ckpt.blocks.size()));
  for (const ParamBlock& b : ckpt.blocks) {
    out.str(b.name);
    out.u64(b.values.size());
    out.f32s(b.values);
  }
  out.u8(ckpt.adam ? 1 : 0);
  if (ckpt.adam) {
    if (ckpt.adam->m.size() != ckpt.blocks.size() || ckpt.adam->v.size() != ckpt.blocks.size()) {
      throw ShapeMismatch("optimizer state does not match the parameter blocks");
    }
    out.u64(ckpt.adam->step);
    for (std::size_t b = 0; b < ckpt.blocks.size(); ++b) {
      if (ckpt.adam->m[b].size() != ckpt.blocks[b].values.size() || ckpt.adam->v[b].size() != ckpt.blocks[b].values.size()) {
        throw ShapeMismatch("optimizer state size mismatch for " + ckpt.blocks[b].name);
      }
      for (double v : ckpt.adam->m[b]) out.f64(v);
      for (double v : ckpt.adam->v[b]) out.f64(v);
    }
  }
  return out.data();
}

Checkpoint parse_checkpoint(std::span<const uint8_t> bytes) {
  ingest::ByteReader in(bytes);
  if (bytes.size() < kMagic.size() || in.bytes(kMagic.size()) != kMagic) throw BadMagic("not a checkpoint file");
  const uint32_t version = in.u32();
  if (version != kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  const uint8_t kind = in.u8();
  if (kind > 1) throw FormatError("unknown architecture kind " + std::to_string(kind));
  ckpt.arch.kind = static_cast<ArchKind>(kind);
  const uint8_t modality = in.u8();
  if (modality > 3) throw FormatError("unknown modality " + std::to_string(modality));
  ckpt.arch.modality = static_cast<pipeline::Modality>(modality);
  ckpt.arch.input_res = in.i32();
  if (ckpt.arch.input_res < 1 || ckpt.arch.input_res > 4096) throw FormatError("input resolution out of range");
  const uint8_t past_only = in.u8();
  if (past_only > 1) throw FormatError("past_only flag must be 0 or 1");
  ckpt.arch.past_only = past_only == 1;

  const uint32_t count = in.u32();
  if (count > 4096) throw FormatError("too many parameter blocks");
  for (uint32_t b = 0; b < count; ++b) {
    ParamBlock block;
    block.name = in.str(256);
    const uint64_t size = in.u64();
    if (size > kMaxBlock || size * 4 > in.remaining()) throw TruncatedFile("parameter block " + block.name + " is truncated");
    block.values.resize(static_cast<std::size_t>(size));
    in.f32s(block.values);
    ckpt.blocks.push_back(std::move(block));
  }
  const uint8_t has_adam = in.u8();
  if (has_adam > 1) throw FormatError("optimizer flag must be 0 or 1");
  if (has_adam == 1) {
    AdamState state;
    state.step = in.u64();
    for (const ParamBlock& block : ckpt.blocks) {
      if (block.values.size() * 16 > in.remaining()) throw TruncatedFile("optimizer state is truncated");
      std::vector<double> m(block.values.size()), v(block.values.size());
      for (double& x : m) x = in.f64();
      for (double& x : v) x = in.f64();
      state.m.push_back(std::move(m));
      state.v.push_back(std::move(v));
    }
    ckpt.adam = std::move(state);
  }
  if (in.remaining() != 0) throw FormatError("trailing bytes after checkpoint");
  // Validate that the blocks describe the declared architecture.
  if (ckpt.arch.kind == ArchKind::kTwoStream && ckpt.arch.modality != pipeline::Modality::kRgbMvIm) {
    throw FormatError("two-stream checkpoint must use rgb+mv+im input");
  }
  auto model = make_model<float>(ckpt.arch);
  const auto params = model->params();
  if (params.size() != ckpt.blocks.size()) throw FormatError("checkpoint blocks do not match its architecture");
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b]->name != ckpt.blocks[b].name || params[b]->value.size() != ckpt.blocks[b].values.size()) {
      throw FormatError("checkpoint block " + ckpt.blocks[b].name + " does not match its architecture");
    }
  }
  return ckpt;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = serialize_checkpoint(ckpt);
  ingest::write_file_bytes(path, bytes.data(), bytes.size());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingCheckpoint("checkpoint not found: " + path.string());
  return parse_checkpoint(ingest::read_file_bytes(path));
}

}  // namespace mvf::net
