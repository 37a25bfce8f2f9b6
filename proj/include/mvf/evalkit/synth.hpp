#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "mvf/ingest/sidecars.hpp"

namespace mvf::evalkit {

// Paired synthetic clips. A real clip is a textured background panning at a
// constant velocity with a textured elliptical "face" moving on top; its MV
// dump holds the exact per-partition motion. The fake clip shares the real
// clip's frames and boxes; inside the face box its MVs get gaussian noise and
// its macroblocks turn intra more often. Fake types cycle through the five
// forgery types.
struct SynthConfig {
  uint64_t seed = 0;
  int width = 64;
  int height = 64;
  int frames = 8;  // frame 0 is an I-frame
  int train_pairs = 100;
  int val_pairs = 25;
  int test_pairs = 25;
  int face_size = 32;
  double max_speed = 2.0;          // pixels per frame, per axis
  double real_intra_rate = 0.02;   // per macroblock, real and fake alike
  double noise = 1.0;              // fake corruption strength; 0 makes fakes equal reals
  double mv_noise_sigma = 1.5;     // pixels, at noise 1
  double intra_boost = 0.3;        // extra intra rate inside the face box, at noise 1

  void validate() const;
  bool operator==(const SynthConfig&) const = default;
};

// Same JSON conventions as the other configs: missing keys keep defaults,
// unknown keys are FormatError.
SynthConfig parse_synth_config(std::string_view json_text);
SynthConfig read_synth_config(const std::filesystem::path& path);
std::string synth_config_json(const SynthConfig& config);

// Writes clips/<pair>/frames/%06d.ppm, boxes.jsonl, real.mvdump.jsonl,
// fake.mvdump.jsonl, plus manifest.jsonl and a matching train_config.json
// under out_dir. Returns the manifest with absolute paths.
ingest::DatasetManifest synth_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace mvf::evalkit
