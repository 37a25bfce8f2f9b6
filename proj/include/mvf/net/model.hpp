#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvf/error.hpp"
#include "mvf/net/layers.hpp"
#include "mvf/pipeline/pipeline.hpp"

namespace mvf::net {

enum class ArchKind : uint8_t { kSingle = 0, kTwoStream = 1 };

// Everything needed to rebuild a model and feed it: the preprocessing that
// produced its inputs is part of the architecture.
struct Architecture {
  ArchKind kind = ArchKind::kSingle;
  pipeline::Modality modality = pipeline::Modality::kMvIm;
  int input_res = 224;
  bool past_only = false;

  int in_channels() const { return pipeline::channel_count(modality); }
  pipeline::PreprocessConfig preprocess() const { return {input_res, modality, past_only}; }
  bool operator==(const Architecture&) const = default;
};

inline constexpr int kStemChannels = 16;
inline constexpr int kBlockChannels[4] = {16, 24, 40, 80};

template <typename T>
class Model {
 public:
  virtual ~Model() = default;
  // Pre-sigmoid outputs, one per batch item.
  virtual std::vector<T> logits(const Act<T>& batch) = 0;
  virtual void backward(std::span<const T> grad_logits) = 0;
  virtual std::vector<Param<T>*> params() = 0;
  virtual void init(Rng& rng) = 0;
  virtual int in_channels() const = 0;

  std::vector<T> forward(const Act<T>& batch) {
    std::vector<T> out = logits(batch);
    for (T& v : out) v = sigmoid(v);
    return out;
  }

  void zero_grad() {
    for (Param<T>* p : params()) std::fill(p->grad.begin(), p->grad.end(), T{0});
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (Param<T>* p : params()) n += p->value.size();
    return n;
  }
};

// Stem conv 3x3/2, four depthwise-separable blocks with stride 2, global
// average pool, FC to one logit. Every conv is followed by a per-channel
// scale/shift and ReLU.
template <typename T>
class MvLiteNet : public Model<T> {
 public:
  explicit MvLiteNet(int in_channels, const std::string& prefix = "") : cin_(in_channels) {
    body_.template add<Conv3x3<T>>(prefix + "stem", in_channels, kStemChannels, 2);
    body_.template add<ScaleShift<T>>(prefix + "stem.affine", kStemChannels);
    body_.template add<Relu<T>>();
    int c = kStemChannels;
    for (int b = 0; b < 4; ++b) {
      const std::string name = prefix + "block" + std::to_string(b);
      body_.template add<Depthwise3x3<T>>(name + ".dw", c, 2);
      body_.template add<ScaleShift<T>>(name + ".dw.affine", c);
      body_.template add<Relu<T>>();
      body_.template add<Pointwise<T>>(name + ".pw", c, kBlockChannels[b]);
      body_.template add<ScaleShift<T>>(name + ".pw.affine", kBlockChannels[b]);
      body_.template add<Relu<T>>();
      c = kBlockChannels[b];
    }
    body_.template add<GlobalAvgPool<T>>();
    body_.template add<Linear<T>>(prefix + "fc", c, 1);
  }

  std::vector<T> logits(const Act<T>& batch) override {
    if (batch.c != cin_) {
      throw ShapeMismatch("model expects " + std::to_string(cin_) + " input channels, got " + std::to_string(batch.c));
    }
    Act<T> out = body_.forward(batch);
    return out.data;
  }

  // Returns the input gradient as well, for callers that chain further.
  Act<T> backward_input(std::span<const T> grad_logits) {
    Act<T> g(static_cast<int>(grad_logits.size()), 1, 1, 1);
    std::copy(grad_logits.begin(), grad_logits.end(), g.data.begin());
    return body_.backward(g);
  }

  void backward(std::span<const T> grad_logits) override { backward_input(grad_logits); }
  std::vector<Param<T>*> params() override { return body_.params(); }
  void init(Rng& rng) override { body_.init(rng); }
  int in_channels() const override { return cin_; }

 private:
  int cin_;
  Sequential<T> body_;
};

// RGB branch on the first three channels, motion branch on the rest, and a
// learned FC(2 -> 1) over the two branch logits.
template <typename T>
class TwoStreamNet : public Model<T> {
 public:
  explicit TwoStreamNet(int motion_channels)
      : rgb_(3, "rgb."), motion_(motion_channels, "motion."), fusion_("fusion", 2, 1) {}

  std::vector<T> logits(const Act<T>& batch) override {
    if (batch.c != in_channels()) {
      throw ShapeMismatch("model expects " + std::to_string(in_channels()) + " input channels, got " +
                          std::to_string(batch.c));
    }
    const Act<T> rgb_in = slice(batch, 0, 3);
    const Act<T> motion_in = slice(batch, 3, batch.c);
    const std::vector<T> a = rgb_.logits(rgb_in);
    const std::vector<T> b = motion_.logits(motion_in);
    Act<T> fused(batch.n, 2, 1, 1);
    for (int i = 0; i < batch.n; ++i) {
      fused.data[static_cast<std::size_t>(2 * i)] = a[static_cast<std::size_t>(i)];
      fused.data[static_cast<std::size_t>(2 * i + 1)] = b[static_cast<std::size_t>(i)];
    }
    return fusion_.forward(fused).data;
  }

  void backward(std::span<const T> grad_logits) override {
    Act<T> g(static_cast<int>(grad_logits.size()), 1, 1, 1);
    std::copy(grad_logits.begin(), grad_logits.end(), g.data.begin());
    const Act<T> gf = fusion_.backward(g);
    std::vector<T> ga(static_cast<std::size_t>(g.n)), gb(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i) {
      ga[static_cast<std::size_t>(i)] = gf.data[static_cast<std::size_t>(2 * i)];
      gb[static_cast<std::size_t>(i)] = gf.data[static_cast<std::size_t>(2 * i + 1)];
    }
    rgb_.backward(ga);
    motion_.backward(gb);
  }

  std::vector<Param<T>*> params() override {
    std::vector<Param<T>*> all = rgb_.params();
    for (Param<T>* p : motion_.params()) all.push_back(p);
    for (Param<T>* p : fusion_.params()) all.push_back(p);
    return all;
  }

  void init(Rng& rng) override {
    rgb_.init(rng);
    motion_.init(rng);
    fusion_.init(rng);
  }

  int in_channels() const override { return 3 + motion_.in_channels(); }

 private:
  static Act<T> slice(const Act<T>& batch, int c0, int c1) {
    Act<T> out(batch.n, c1 - c0, batch.h, batch.w);
    for (int i = 0; i < batch.n; ++i) {
      std::copy(batch.at(i, c0), batch.at(i, c0) + out.plane() * static_cast<std::size_t>(c1 - c0), out.at(i, 0));
    }
    return out;
  }

  MvLiteNet<T> rgb_;
  MvLiteNet<T> motion_;
  Linear<T> fusion_;
};

template <typename T>
std::unique_ptr<Model<T>> make_model(const Architecture& arch) {
  if (arch.kind == ArchKind::kTwoStream) {
    if (arch.modality != pipeline::Modality::kRgbMvIm) throw FormatError("two-stream model needs rgb+mv+im input");
    return std::make_unique<TwoStreamNet<T>>(pipeline::channel_count(pipeline::Modality::kMvIm));
  }
  return std::make_unique<MvLiteNet<T>>(arch.in_channels());
}

template <typename T>
std::unique_ptr<Model<T>> make_model(const Architecture& arch, uint64_t seed) {
  auto model = make_model<T>(arch);
  Rng rng(seed);
  model->init(rng);
  return model;
}

// Stacks samples into one batch.
template <typename T>
Act<T> make_batch(std::span<const pipeline::SampleTensor* const> samples) {
  if (samples.empty()) throw ShapeMismatch("empty batch");
  const Tensor& first = samples[0]->values;
  Act<T> batch(static_cast<int>(samples.size()), first.channels, first.height, first.width);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Tensor& t = samples[i]->values;
    if (t.channels != first.channels || t.height != first.height || t.width != first.width) {
      throw ShapeMismatch("batch items differ in shape");
    }
    std::copy(t.data.begin(), t.data.end(), batch.at(static_cast<int>(i), 0));
  }
  return batch;
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool operator==(const AdamConfig&) const = default;
};

struct AdamState {
  uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  bool operator==(const AdamState&) const = default;
};

// One bias-corrected Adam update. A non-finite gradient anywhere aborts the
// step before any parameter or state changes.
template <typename T>
void adam_step(std::span<Param<T>* const> params, AdamState& state, const AdamConfig& config) {
  for (const Param<T>* p : params) {
    for (T g : p->grad) {
      if (!std::isfinite(static_cast<double>(g))) throw NonFiniteGradient("non-finite gradient in " + p->name);
    }
  }
  if (state.m.empty()) {
    for (const Param<T>* p : params) {
      state.m.emplace_back(p->value.size(), 0.0);
      state.v.emplace_back(p->value.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ShapeMismatch("optimizer state does not match the parameters");
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t b = 0; b < params.size(); ++b) {
    Param<T>& p = *params[b];
    std::vector<double>& m = state.m[b];
    std::vector<double>& v = state.v[b];
    if (m.size() != p.value.size()) throw ShapeMismatch("optimizer state size mismatch for " + p.name);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = static_cast<double>(p.grad[i]);
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.value[i] = static_cast<T>(static_cast<double>(p.value[i]) - config.lr * mhat / (std::sqrt(vhat) + config.eps));
    }
  }
}

// Checkpoint layout, little-endian:
//   "MVLITENT" | u32 version (1)
//   | u8 arch kind | u8 modality | i32 input_res | u8 past_only
//   | u32 block count | per block: str name | u64 size | size x f32
//   | u8 has_adam | [u64 step | per block: size x f64 m | size x f64 v]
// Strings are u32 length + bytes.
struct ParamBlock {
  std::string name;
  std::vector<float> values;
  bool operator==(const ParamBlock&) const = default;
};

struct Checkpoint {
  Architecture arch;
  std::vector<ParamBlock> blocks;
  std::optional<AdamState> adam;
  bool operator==(const Checkpoint&) const = default;
};

std::vector<uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::span<const uint8_t> bytes);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

template <typename T>
Checkpoint capture(const Architecture& arch, Model<T>& model, const AdamState* adam = nullptr) {
  Checkpoint ckpt;
  ckpt.arch = arch;
  for (const Param<T>* p : model.params()) {
    ParamBlock block{p->name, {}};
    block.values.reserve(p->value.size());
    for (T v : p->value) block.values.push_back(static_cast<float>(v));
    ckpt.blocks.push_back(std::move(block));
  }
  if (adam != nullptr) ckpt.adam = *adam;
  return ckpt;
}

// Copies checkpoint parameters into a model of the same architecture.
template <typename T>
void restore(const Checkpoint& ckpt, Model<T>& model) {
  const auto params = model.params();
  if (params.size() != ckpt.blocks.size()) throw ShapeMismatch("checkpoint has a different number of parameter blocks");
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b]->name != ckpt.blocks[b].name || params[b]->value.size() != ckpt.blocks[b].values.size()) {
      throw ShapeMismatch("checkpoint block " + ckpt.blocks[b].name + " does not match " + params[b]->name);
    }
    for (std::size_t i = 0; i < params[b]->value.size(); ++i) params[b]->value[i] = static_cast<T>(ckpt.blocks[b].values[i]);
  }
}

template <typename T>
std::unique_ptr<Model<T>> load_model(const Checkpoint& ckpt) {
  auto model = make_model<T>(ckpt.arch);
  restore(ckpt, *model);
  return model;
}

}  // namespace mvf::net
