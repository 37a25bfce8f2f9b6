#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mvf/image.hpp"
#include "mvf/ingest/fields.hpp"
#include "mvf/ingest/sidecars.hpp"
#include "mvf/net/model.hpp"
#include "mvf/pipeline/pipeline.hpp"

namespace mvf::net {

// A manifest entry with its inputs loaded.
struct Video {
  std::string id;
  ingest::Label label = ingest::Label::kReal;
  ingest::ForgeryType forgery = ingest::ForgeryType::kPristine;
  int width = 0;
  int height = 0;
  int frame_count = 0;
  std::vector<RgbImage> frames;   // empty unless RGB was requested
  ingest::FieldSequence fields;   // empty unless motion was requested
  std::vector<ingest::FaceBox> boxes;

  // Falls back to the whole frame when no box file was given.
  pipeline::FrameInput input(int frame) const;
};

// Motion comes from `fields`, else `dump`, else `stream`; frames are read
// from the `frames` directory. Frame count is the shorter of the available
// sources.
Video load_video(const ingest::ManifestEntry& entry, bool need_rgb, bool need_motion);
std::vector<Video> load_videos(const std::vector<const ingest::ManifestEntry*>& entries, const Architecture& arch);

struct TrainConfig {
  Architecture arch;
  AdamConfig adam;
  int batch_size = 16;
  int epochs = 8;
  uint64_t seed = 0;
  int frames_per_video = 4;  // frames drawn from each selected video per epoch
  int eval_frames = 100;     // k of the video-level average
  // When set, only fakes of this type are used for training and validation.
  std::optional<ingest::ForgeryType> train_forgery;
  pipeline::AugmentationConfig augment;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// JSON object with keys: kind ("single" | "two-stream"), modality, input_res,
// past_only, lr, beta1, beta2, eps, batch_size, epochs, seed,
// frames_per_video, eval_frames, train_forgery, augment (object). Missing keys
// keep defaults; unknown keys are FormatError.
TrainConfig parse_train_config(std::string_view json_text);
TrainConfig read_train_config(const std::filesystem::path& path);
std::string train_config_json(const TrainConfig& config);

// Per-epoch video selection: every real video once and the same number of
// fakes, split as evenly as possible across the fake types present.
// Returns indices into `videos`.
std::vector<std::size_t> balanced_epoch(const std::vector<const Video*>& videos, uint64_t seed);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double val_acc = 0;
};

struct TrainResult {
  Checkpoint best;  // lowest validation loss
  int best_epoch = 0;
  std::vector<EpochLog> log;
};

TrainResult train(const std::vector<Video>& train_videos, const std::vector<Video>& val_videos, const TrainConfig& config);
TrainResult train(const ingest::DatasetManifest& manifest, const TrainConfig& config);

// CSV header: epoch,train_loss,val_loss,val_acc
std::string training_log_csv(const std::vector<EpochLog>& log);

// Mean of per-frame probabilities over sample_frames(frame_count, k, seed).
double predict_video(int frame_count, const std::function<double(int)>& frame_probability, int k, uint64_t seed);
double predict_video(Model<float>& model, const Architecture& arch, const Video& video, int k, uint64_t seed);

inline bool is_fake_prediction(double probability) { return probability >= 0.5; }

}  // namespace mvf::net
