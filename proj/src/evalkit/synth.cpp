#include "mvf/evalkit/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "json.hpp"
#include "mvf/error.hpp"
#include "mvf/ingest/fileio.hpp"
#include "mvf/ingest/frames.hpp"
#include "mvf/ingest/mvdump.hpp"
#include "mvf/net/train.hpp"
#include "mvf/rng.hpp"

namespace mvf::evalkit {

using nlohmann::json;

void SynthConfig::validate() const {
  if (width < 16 || height < 16 || width > 4096 || height > 4096) throw FormatError("synth frame size must lie in [16, 4096]");
  if (frames < 2 || frames > 10000) throw FormatError("synth clips need at least 2 frames");
  if (train_pairs < 1 || val_pairs < 1 || test_pairs < 1) throw FormatError("every split needs at least one pair");
  if (face_size < 8 || face_size > std::min(width, height)) throw FormatError("face_size must fit in the frame");
  if (!(max_speed >= 0 && max_speed <= 16)) throw FormatError("max_speed must lie in [0, 16]");
  for (double p : {real_intra_rate, intra_boost}) {
    if (!(p >= 0 && p <= 1)) throw FormatError("intra rates must lie in [0, 1]");
  }
  if (!(noise >= 0 && noise <= 100) || !(mv_noise_sigma >= 0 && mv_noise_sigma <= 100)) {
    throw FormatError("noise settings must be finite and non-negative");
  }
}

namespace {

struct IntField {
  const char* name;
  int SynthConfig::*member;
};
struct RealField {
  const char* name;
  double SynthConfig::*member;
};

constexpr IntField kIntFields[] = {
    {"width", &SynthConfig::width},           {"height", &SynthConfig::height},
    {"frames", &SynthConfig::frames},         {"train_pairs", &SynthConfig::train_pairs},
    {"val_pairs", &SynthConfig::val_pairs},   {"test_pairs", &SynthConfig::test_pairs},
    {"face_size", &SynthConfig::face_size},
};
constexpr RealField kRealFields[] = {
    {"max_speed", &SynthConfig::max_speed},   {"real_intra_rate", &SynthConfig::real_intra_rate},
    {"noise", &SynthConfig::noise},           {"mv_noise_sigma", &SynthConfig::mv_noise_sigma},
    {"intra_boost", &SynthConfig::intra_boost},
};

}  // namespace

SynthConfig parse_synth_config(std::string_view text) {
  json obj = json::parse(text.begin(), text.end(), nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) throw FormatError("synth config must be a JSON object");
  SynthConfig c;
  for (const auto& [key, value] : obj.items()) {
    if (key == "seed") {
      if (!value.is_number_unsigned()) throw FormatError("seed must be a non-negative integer");
      c.seed = value.get<uint64_t>();
      continue;
    }
    bool known = false;
    for (const IntField& f : kIntFields) {
      if (key != f.name) continue;
      if (!value.is_number_integer()) throw FormatError(key + " must be an integer");
      const int64_t v = value.get<int64_t>();
      if (v < -(1 << 20) || v > 1 << 20) throw FormatError(key + " out of range");
      c.*f.member = static_cast<int>(v);
      known = true;
    }
    for (const RealField& f : kRealFields) {
      if (key != f.name) continue;
      if (!value.is_number()) throw FormatError(key + " must be a number");
      c.*f.member = value.get<double>();
      known = true;
    }
    if (!known) throw FormatError("unknown synth config key \"" + key + "\"");
  }
  c.validate();
  return c;
}

SynthConfig read_synth_config(const std::filesystem::path& path) { return parse_synth_config(ingest::read_file_text(path)); }

std::string synth_config_json(const SynthConfig& c) {
  json obj = json::object();
  obj["seed"] = c.seed;
  for (const IntField& f : kIntFields) obj[f.name] = c.*f.member;
  for (const RealField& f : kRealFields) obj[f.name] = c.*f.member;
  return obj.dump(2) + "\n";
}

namespace {

// Smooth colour texture from a few random plane waves per channel.
class Texture {
 public:
  Texture(Rng& rng, double min_freq, double max_freq) {
    for (auto& channel : waves_) {
      for (Wave& w : channel) {
        const double angle = rng.uniform(0, 2 * std::numbers::pi);
        const double freq = rng.uniform(min_freq, max_freq);
        w = Wave{freq * std::cos(angle), freq * std::sin(angle), rng.uniform(0, 2 * std::numbers::pi), rng.uniform(15, 40)};
      }
      base_.push_back(rng.uniform(70, 185));
    }
  }

  double sample(int channel, double x, double y) const {
    double v = base_[static_cast<std::size_t>(channel)];
    for (const Wave& w : waves_[static_cast<std::size_t>(channel)]) v += w.amp * std::sin(w.fx * x + w.fy * y + w.phase);
    return v;
  }

 private:
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::array<std::array<Wave, 4>, 3> waves_{};
  std::vector<double> base_;
};

uint8_t to_byte(double v) { return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

struct Clip {
  std::vector<RgbImage> frames;
  std::vector<ingest::FaceBox> boxes;
  ingest::MvDump real;
  ingest::MvDump fake;
};

Clip make_clip(const SynthConfig& c, uint64_t pair_seed) {
  Rng rng(pair_seed);
  Clip clip;
  const Texture background(rng, 0.05, 0.25);
  const Texture face(rng, 0.2, 0.6);
  // Velocities on the quarter-pel grid.
  const int max_q = static_cast<int>(std::floor(c.max_speed * 4));
  auto velocity = [&]() { return static_cast<int>(rng.below(static_cast<uint64_t>(2 * max_q + 1))) - max_q; };
  const int bg_qx = velocity(), bg_qy = velocity();
  const int face_qx = velocity(), face_qy = velocity();
  const double radius = c.face_size / 2.0;
  const double travel_x = std::abs(face_qx) / 4.0 * (c.frames - 1);
  const double travel_y = std::abs(face_qy) / 4.0 * (c.frames - 1);
  auto start = [&](int extent, double travel, int q) {
    const double lo = radius, hi = extent - radius - travel;
    const double s = hi > lo ? rng.uniform(lo, hi) : lo;
    return q >= 0 ? s : s + travel;
  };
  const double cx0 = start(c.width, travel_x, face_qx);
  const double cy0 = start(c.height, travel_y, face_qy);
  const double rx = radius * 0.85, ry = radius;

  auto centre = [&](int t) { return std::pair{cx0 + face_qx / 4.0 * t, cy0 + face_qy / 4.0 * t}; };
  auto in_face = [&](int t, double x, double y) {
    const auto [fx, fy] = centre(t);
    const double dx = (x - fx) / rx, dy = (y - fy) / ry;
    return dx * dx + dy * dy <= 1.0;
  };

  for (int t = 0; t < c.frames; ++t) {
    RgbImage img(c.width, c.height);
    const auto [fx, fy] = centre(t);
    for (int y = 0; y < c.height; ++y) {
      for (int x = 0; x < c.width; ++x) {
        uint8_t* px = img.at(x, y);
        const double px_c = x + 0.5, py_c = y + 0.5;
        for (int ch = 0; ch < 3; ++ch) {
          const double v = in_face(t, px_c, py_c) ? face.sample(ch, px_c - fx, py_c - fy)
                                                  : background.sample(ch, px_c - bg_qx / 4.0 * t, py_c - bg_qy / 4.0 * t);
          px[ch] = to_byte(v);
        }
      }
    }
    clip.frames.push_back(std::move(img));
    const int bx = std::clamp(static_cast<int>(std::lround(fx - radius)), 0, c.width - c.face_size);
    const int by = std::clamp(static_cast<int>(std::lround(fy - radius)), 0, c.height - c.face_size);
    clip.boxes.push_back(ingest::FaceBox{t, bx, by, c.face_size, c.face_size});
  }

  // Real motion: one past vector per 8x8 partition, taken at its centre.
  const int mbs_x = (c.width + 15) / 16, mbs_y = (c.height + 15) / 16;
  Rng fake_rng(derive_seed(pair_seed, 1));
  for (int t = 1; t < c.frames; ++t) {
    ingest::MvDumpFrame real{t, {}}, fake{t, {}};
    const ingest::FaceBox& box = clip.boxes[static_cast<std::size_t>(t)];
    for (int my = 0; my < mbs_y; ++my) {
      for (int mx = 0; mx < mbs_x; ++mx) {
        const bool real_intra = rng.bernoulli(c.real_intra_rate);
        const bool overlaps_box = mx * 16 < box.x + box.w && mx * 16 + 16 > box.x && my * 16 < box.y + box.h && my * 16 + 16 > box.y;
        const bool fake_intra = real_intra || (overlaps_box && fake_rng.bernoulli(c.noise * c.intra_boost));
        for (int part = 0; part < 4; ++part) {
          const int x0 = mx * 16 + (part % 2) * 8, y0 = my * 16 + (part / 2) * 8;
          const bool on_face = in_face(t, x0 + 4.0, y0 + 4.0);
          ingest::MvDumpRecord r;
          r.frame_index = t;
          r.direction = ingest::MvDirection::kPast;
          r.x0 = x0;
          r.y0 = y0;
          r.w = 8;
          r.h = 8;
          r.mv_x_qpel = on_face ? -face_qx : -bg_qx;
          r.mv_y_qpel = on_face ? -face_qy : -bg_qy;
          r.ref_offset = -1;
          if (!real_intra) real.records.push_back(r);
          const bool in_box = x0 < box.x + box.w && x0 + 8 > box.x && y0 < box.y + box.h && y0 + 8 > box.y;
          const double sigma_q = 4.0 * c.noise * c.mv_noise_sigma;
          if (in_box && sigma_q > 0) {
            r.mv_x_qpel += static_cast<int>(std::lround(fake_rng.normal() * sigma_q));
            r.mv_y_qpel += static_cast<int>(std::lround(fake_rng.normal() * sigma_q));
          }
          if (!fake_intra) fake.records.push_back(r);
        }
      }
    }
    if (!real.records.empty()) clip.real.push_back(std::move(real));
    if (!fake.records.empty()) clip.fake.push_back(std::move(fake));
  }
  return clip;
}

}  // namespace

ingest::DatasetManifest synth_dataset(const SynthConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  const std::filesystem::path root = std::filesystem::absolute(out_dir);
  ingest::DatasetManifest manifest;
  const int pairs = config.train_pairs + config.val_pairs + config.test_pairs;
  for (int p = 0; p < pairs; ++p) {
    const Clip clip = make_clip(config, derive_seed(config.seed, static_cast<uint64_t>(p)));
    char name[32];
    std::snprintf(name, sizeof(name), "%04d", p);
    const std::filesystem::path dir = root / "clips" / name;
    for (std::size_t t = 0; t < clip.frames.size(); ++t) {
      ingest::write_ppm(ingest::frame_path(dir / "frames", static_cast<int>(t)), clip.frames[t]);
    }
    ingest::write_boxes(dir / "boxes.jsonl", clip.boxes);
    ingest::write_mvdump(dir / "real.mvdump.jsonl", clip.real);
    ingest::write_mvdump(dir / "fake.mvdump.jsonl", clip.fake);

    const ingest::Split split = p < config.train_pairs                      ? ingest::Split::kTrain
                                : p < config.train_pairs + config.val_pairs ? ingest::Split::kVal
                                                                            : ingest::Split::kTest;
    ingest::ManifestEntry real;
    real.video_id = std::string("synth_") + name + "_real";
    real.label = ingest::Label::kReal;
    real.forgery = ingest::ForgeryType::kPristine;
    real.split = split;
    real.frames = dir / "frames";
    real.boxes = dir / "boxes.jsonl";
    real.dump = dir / "real.mvdump.jsonl";
    ingest::ManifestEntry fake = real;
    fake.video_id = std::string("synth_") + name + "_fake";
    fake.label = ingest::Label::kFake;
    fake.forgery = ingest::kForgeryTypes[p % 5];
    fake.dump = dir / "fake.mvdump.jsonl";
    manifest.entries.push_back(std::move(real));
    manifest.entries.push_back(std::move(fake));
  }
  ingest::write_manifest(root / "manifest.jsonl", manifest);
  net::TrainConfig train;
  train.arch.input_res = 64;
  ingest::write_file_text(root / "train_config.json", net::train_config_json(train));
  ingest::write_file_text(root / "synth_config.json", synth_config_json(config));
  return manifest;
}

}  // namespace mvf::evalkit
