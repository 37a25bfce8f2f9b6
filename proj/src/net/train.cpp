#include "mvf/net/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "mvf/bitparse/stream.hpp"
#include "mvf/ingest/fileio.hpp"
#include "mvf/ingest/frames.hpp"
#include "mvf/ingest/mvdump.hpp"

namespace mvf::net {

using ingest::ManifestEntry;
using nlohmann::json;
using pipeline::SampleTensor;

pipeline::FrameInput Video::input(int frame) const {
  pipeline::FrameInput in;
  in.frame = frames.empty() ? nullptr : &frames[static_cast<std::size_t>(frame)];
  in.field = fields.frames.empty() ? nullptr : &fields.frames[static_cast<std::size_t>(frame)].field;
  in.frame_w = width;
  in.frame_h = height;
  const auto box = ingest::box_for_frame(boxes, frame);
  in.box = box ? *box : ingest::FaceBox{frame, 0, 0, width, height};
  return in;
}

Video load_video(const ManifestEntry& entry, bool need_rgb, bool need_motion) {
  Video v;
  v.id = entry.video_id;
  v.label = entry.label;
  v.forgery = entry.forgery;
  const auto where = [&](const std::string& msg) { return "video " + entry.video_id + ": " + msg; };

  if (!entry.frames.empty()) {
    ingest::FrameSequence seq = ingest::read_frames(entry.frames);
    if (seq.first_index != 0) throw FormatError(where("frame files must start at index 0"));
    if (seq.frames.empty()) throw MissingFrame(where("no frames in " + entry.frames.string()));
    v.width = seq.frames.front().width;
    v.height = seq.frames.front().height;
    v.frame_count = static_cast<int>(seq.frames.size());
    if (need_rgb) v.frames = std::move(seq.frames);
  } else if (need_rgb) {
    throw MissingFrame(where("RGB input needs a frames directory"));
  }

  if (need_motion) {
    if (!entry.fields.empty()) {
      v.fields = ingest::read_fields(entry.fields);
    } else if (!entry.dump.empty()) {
      if (v.width == 0) throw MissingFrame(where("an MV dump needs the frames directory for the frame size"));
      v.fields = ingest::fields_from_dump(ingest::read_mvdump(entry.dump), v.width, v.height, v.frame_count);
    } else if (!entry.stream.empty()) {
      const auto bytes = ingest::read_file_bytes(entry.stream);
      v.fields = ingest::fields_from_stream(bitparse::parse_stream(bytes));
    } else {
      throw MissingFrame(where("motion input needs fields, dump or stream"));
    }
    if (v.fields.frames.empty()) throw MissingFrame(where("no motion frames"));
    for (std::size_t i = 0; i < v.fields.frames.size(); ++i) {
      if (v.fields.frames[i].frame_index != static_cast<int>(i)) throw FormatError(where("motion frames must be contiguous from 0"));
    }
    if (v.width == 0) {
      v.width = v.fields.width;
      v.height = v.fields.height;
      v.frame_count = static_cast<int>(v.fields.frames.size());
    } else {
      if (v.fields.width != v.width || v.fields.height != v.height) throw ShapeMismatch(where("motion and frame sizes differ"));
      v.frame_count = std::min(v.frame_count, static_cast<int>(v.fields.frames.size()));
    }
  }
  if (!entry.boxes.empty()) v.boxes = ingest::read_boxes(entry.boxes);
  if (v.frame_count == 0) throw MissingFrame(where("no frames"));
  return v;
}

std::vector<Video> load_videos(const std::vector<const ManifestEntry*>& entries, const Architecture& arch) {
  const bool rgb = arch.modality == pipeline::Modality::kRgb || arch.modality == pipeline::Modality::kRgbMvIm;
  const bool motion = arch.modality != pipeline::Modality::kRgb;
  std::vector<Video> videos;
  videos.reserve(entries.size());
  for (const ManifestEntry* e : entries) videos.push_back(load_video(*e, rgb, motion));
  return videos;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw FormatError("epochs must be >= 1");
  if (batch_size < 1) throw FormatError("batch_size must be >= 1");
  if (frames_per_video < 1 || eval_frames < 1) throw FormatError("frame counts must be >= 1");
  if (arch.input_res < 16 || arch.input_res > 4096) throw FormatError("input_res must lie in [16, 4096]");
  if (!(adam.lr > 0) || !(adam.eps > 0) || adam.beta1 < 0 || adam.beta1 >= 1 || adam.beta2 < 0 || adam.beta2 >= 1) {
    throw FormatError("Adam hyperparameters out of range");
  }
  if (arch.kind == ArchKind::kTwoStream && arch.modality != pipeline::Modality::kRgbMvIm) {
    throw FormatError("two-stream model needs modality rgb+mv+im");
  }
  if (train_forgery == ingest::ForgeryType::kPristine) throw FormatError("train_forgery must be a fake type");
  augment.validate();
}

TrainConfig parse_train_config(std::string_view text) {
  json obj = json::parse(text.begin(), text.end(), nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) throw FormatError("train config must be a JSON object");
  TrainConfig c;
  auto number = [](const std::string& key, const json& v) {
    if (!v.is_number()) throw FormatError(key + " must be a number");
    return v.get<double>();
  };
  auto integer = [](const std::string& key, const json& v, int64_t lo, int64_t hi) {
    if (!v.is_number_integer()) throw FormatError(key + " must be an integer");
    const int64_t x = v.get<int64_t>();
    if (x < lo || x > hi) throw FormatError(key + " out of range");
    return x;
  };
  auto string = [](const std::string& key, const json& v) {
    if (!v.is_string()) throw FormatError(key + " must be a string");
    return v.get<std::string>();
  };
  for (const auto& [key, value] : obj.items()) {
    if (key == "kind") {
      const std::string k = string(key, value);
      if (k == "single") {
        c.arch.kind = ArchKind::kSingle;
      } else if (k == "two-stream") {
        c.arch.kind = ArchKind::kTwoStream;
      } else {
        throw FormatError("kind must be \"single\" or \"two-stream\"");
      }
    } else if (key == "modality") {
      c.arch.modality = pipeline::parse_modality(string(key, value));
    } else if (key == "input_res") {
      c.arch.input_res = static_cast<int>(integer(key, value, 16, 4096));
    } else if (key == "past_only") {
      if (!value.is_boolean()) throw FormatError("past_only must be a boolean");
      c.arch.past_only = value.get<bool>();
    } else if (key == "lr") {
      c.adam.lr = number(key, value);
    } else if (key == "beta1") {
      c.adam.beta1 = number(key, value);
    } else if (key == "beta2") {
      c.adam.beta2 = number(key, value);
    } else if (key == "eps") {
      c.adam.eps = number(key, value);
    } else if (key == "batch_size") {
      c.batch_size = static_cast<int>(integer(key, value, 1, 1 << 16));
    } else if (key == "epochs") {
      c.epochs = static_cast<int>(integer(key, value, 1, 1 << 16));
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw FormatError("seed must be a non-negative integer");
      c.seed = value.get<uint64_t>();
    } else if (key == "frames_per_video") {
      c.frames_per_video = static_cast<int>(integer(key, value, 1, 1 << 16));
    } else if (key == "eval_frames") {
      c.eval_frames = static_cast<int>(integer(key, value, 1, 1 << 16));
    } else if (key == "train_forgery") {
      if (value.is_null()) {
        c.train_forgery.reset();
      } else {
        c.train_forgery = ingest::parse_forgery(string(key, value));
      }
    } else if (key == "augment") {
      c.augment = pipeline::parse_augmentation_config(value.dump());
    } else {
      throw FormatError("unknown train config key \"" + key + "\"");
    }
  }
  c.validate();
  return c;
}

TrainConfig read_train_config(const std::filesystem::path& path) { return parse_train_config(ingest::read_file_text(path)); }

std::string train_config_json(const TrainConfig& c) {
  json obj = json::object();
  obj["kind"] = c.arch.kind == ArchKind::kTwoStream ? "two-stream" : "single";
  obj["modality"] = std::string(pipeline::modality_name(c.arch.modality));
  obj["input_res"] = c.arch.input_res;
  obj["past_only"] = c.arch.past_only;
  obj["lr"] = c.adam.lr;
  obj["beta1"] = c.adam.beta1;
  obj["beta2"] = c.adam.beta2;
  obj["eps"] = c.adam.eps;
  obj["batch_size"] = c.batch_size;
  obj["epochs"] = c.epochs;
  obj["seed"] = c.seed;
  obj["frames_per_video"] = c.frames_per_video;
  obj["eval_frames"] = c.eval_frames;
  obj["train_forgery"] = c.train_forgery ? json(std::string(ingest::forgery_code(*c.train_forgery))) : json(nullptr);
  obj["augment"] = json::parse(pipeline::augmentation_config_json(c.augment));
  return obj.dump(2) + "\n";
}

namespace {

template <typename V>
void shuffle(std::vector<V>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng.below(i)]);
}

// A reproducible per-frame key for augmentation randomness.
uint64_t frame_key(uint64_t a, uint64_t b, uint64_t c) { return splitmix64(splitmix64(a) ^ (b << 32 | c)); }

struct FrameRef {
  std::size_t video;
  int frame;
};

double evaluate(Model<float>& model, const std::vector<std::vector<SampleTensor>>& samples,
                const std::vector<Video>& videos, int batch_size, double* accuracy) {
  double loss = 0;
  std::size_t count = 0;
  std::size_t correct = 0;
  for (std::size_t v = 0; v < samples.size(); ++v) {
    const float label = videos[v].label == ingest::Label::kFake ? 1.0f : 0.0f;
    double prob_sum = 0;
    for (std::size_t start = 0; start < samples[v].size(); start += static_cast<std::size_t>(batch_size)) {
      std::vector<const SampleTensor*> ptrs;
      for (std::size_t i = start; i < std::min(samples[v].size(), start + static_cast<std::size_t>(batch_size)); ++i) {
        ptrs.push_back(&samples[v][i]);
      }
      const auto probs = model.forward(make_batch<float>(ptrs));
      for (float p : probs) {
        loss += bce_loss<double>(p, label);
        prob_sum += p;
        ++count;
      }
    }
    const double video_prob = prob_sum / static_cast<double>(samples[v].size());
    if (is_fake_prediction(video_prob) == (label == 1.0f)) ++correct;
  }
  if (accuracy != nullptr) *accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  return loss / static_cast<double>(count);
}

std::vector<const Video*> filter(const std::vector<Video>& videos, const std::optional<ingest::ForgeryType>& forgery) {
  std::vector<const Video*> out;
  for (const Video& v : videos) {
    if (!forgery || v.label == ingest::Label::kReal || v.forgery == *forgery) out.push_back(&v);
  }
  return out;
}

}  // namespace

std::vector<std::size_t> balanced_epoch(const std::vector<const Video*>& videos, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> reals;
  std::vector<std::pair<ingest::ForgeryType, std::vector<std::size_t>>> fakes;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    if (videos[i]->label == ingest::Label::kReal) {
      reals.push_back(i);
      continue;
    }
    auto it = std::find_if(fakes.begin(), fakes.end(), [&](const auto& g) { return g.first == videos[i]->forgery; });
    if (it == fakes.end()) {
      fakes.push_back({videos[i]->forgery, {}});
      it = fakes.end() - 1;
    }
    it->second.push_back(i);
  }
  if (reals.empty() || fakes.empty()) throw EmptySplit("training needs both real and fake videos");
  std::sort(fakes.begin(), fakes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::size_t> out = reals;
  const std::size_t types = fakes.size();
  for (std::size_t t = 0; t < types; ++t) {
    std::size_t quota = reals.size() / types + (t < reals.size() % types ? 1 : 0);
    auto& group = fakes[t].second;
    while (quota > 0) {
      const int take = static_cast<int>(std::min(quota, group.size()));
      for (int k : pipeline::sample_frames(static_cast<int>(group.size()), take, rng.next())) {
        out.push_back(group[static_cast<std::size_t>(k)]);
      }
      quota -= static_cast<std::size_t>(take);
    }
  }
  shuffle(out, rng);
  return out;
}

TrainResult train(const std::vector<Video>& train_all, const std::vector<Video>& val_all, const TrainConfig& config) {
  config.validate();
  const std::vector<const Video*> train_set = filter(train_all, config.train_forgery);
  std::vector<Video> val_videos;
  for (const Video* v : filter(val_all, config.train_forgery)) val_videos.push_back(*v);
  if (train_set.empty()) throw EmptySplit("train split is empty");
  if (val_videos.empty()) throw EmptySplit("val split is empty");

  const pipeline::PreprocessConfig pre = config.arch.preprocess();
  std::vector<std::vector<SampleTensor>> val_samples;
  for (std::size_t v = 0; v < val_videos.size(); ++v) {
    std::vector<SampleTensor> s;
    const uint64_t pick_seed = derive_seed(config.seed, 0x5EED0000ull + v);
    for (int f : pipeline::sample_frames(val_videos[v].frame_count, config.eval_frames, pick_seed)) {
      s.push_back(pipeline::make_sample(val_videos[v].input(f), pre, nullptr, 0));
    }
    val_samples.push_back(std::move(s));
  }

  auto model = make_model<float>(config.arch, derive_seed(config.seed, 0));
  const auto params = model->params();
  AdamState adam;
  TrainResult result;
  double best_loss = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const uint64_t epoch_seed = derive_seed(config.seed, static_cast<uint64_t>(epoch));
    Rng rng(epoch_seed);
    std::vector<FrameRef> refs;
    for (std::size_t v : balanced_epoch(train_set, rng.next())) {
      for (int f : pipeline::sample_frames(train_set[v]->frame_count, config.frames_per_video, rng.next())) {
        refs.push_back({v, f});
      }
    }
    shuffle(refs, rng);

    double loss_sum = 0;
    for (std::size_t start = 0; start < refs.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(refs.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<SampleTensor> samples;
      std::vector<float> labels;
      pipeline::AugmentationConfig aug = config.augment;
      aug.seed = derive_seed(config.augment.seed, epoch_seed);
      for (std::size_t i = start; i < end; ++i) {
        const Video& video = *train_set[refs[i].video];
        samples.push_back(pipeline::make_sample(video.input(refs[i].frame), pre, &aug,
                                                frame_key(static_cast<uint64_t>(epoch), i, static_cast<uint64_t>(refs[i].frame))));
        labels.push_back(video.label == ingest::Label::kFake ? 1.0f : 0.0f);
      }
      std::vector<const SampleTensor*> ptrs;
      for (const SampleTensor& s : samples) ptrs.push_back(&s);
      const Act<float> batch = make_batch<float>(ptrs);
      model->zero_grad();
      const std::vector<float> z = model->logits(batch);
      std::vector<float> grad(z.size());
      const float scale = 1.0f / static_cast<float>(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) {
        loss_sum += bce_loss<double>(sigmoid(z[i]), labels[i]);
        grad[i] = bce_logit_grad(z[i], labels[i]) * scale;
      }
      model->backward(grad);
      adam_step<float>(params, adam, config.adam);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(refs.size());
    entry.val_loss = evaluate(*model, val_samples, val_videos, config.batch_size, &entry.val_acc);
    result.log.push_back(entry);
    if (epoch == 1 || entry.val_loss < best_loss) {
      best_loss = entry.val_loss;
      result.best_epoch = epoch;
      result.best = capture(config.arch, *model, &adam);
    }
  }
  return result;
}

TrainResult train(const ingest::DatasetManifest& manifest, const TrainConfig& config) {
  config.validate();
  const auto train_entries = manifest.select(ingest::Split::kTrain);
  const auto val_entries = manifest.select(ingest::Split::kVal);
  if (train_entries.empty()) throw EmptySplit("manifest has no train videos");
  if (val_entries.empty()) throw EmptySplit("manifest has no val videos");
  return train(load_videos(train_entries, config.arch), load_videos(val_entries, config.arch), config);
}

std::string training_log_csv(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,val_acc\n";
  out.precision(6);
  out << std::fixed;
  for (const EpochLog& e : log) out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.val_acc << '\n';
  return out.str();
}

double predict_video(int frame_count, const std::function<double(int)>& frame_probability, int k, uint64_t seed) {
  if (frame_count < 1) throw MissingFrame("video has no frames");
  const std::vector<int> picks = pipeline::sample_frames(frame_count, k, seed);
  double sum = 0;
  for (int f : picks) sum += frame_probability(f);
  return sum / static_cast<double>(picks.size());
}

double predict_video(Model<float>& model, const Architecture& arch, const Video& video, int k, uint64_t seed) {
  if (video.frame_count < 1) throw MissingFrame("video " + video.id + " has no frames");
  const pipeline::PreprocessConfig pre = arch.preprocess();
  const std::vector<int> picks = pipeline::sample_frames(video.frame_count, k, seed);
  std::vector<SampleTensor> samples;
  for (int f : picks) samples.push_back(pipeline::make_sample(video.input(f), pre, nullptr, 0));
  double sum = 0;
  constexpr std::size_t kChunk = 32;
  for (std::size_t start = 0; start < samples.size(); start += kChunk) {
    std::vector<const SampleTensor*> ptrs;
    for (std::size_t i = start; i < std::min(samples.size(), start + kChunk); ++i) ptrs.push_back(&samples[i]);
    for (float p : model.forward(make_batch<float>(ptrs))) sum += p;
  }
  return sum / static_cast<double>(samples.size());
}

}  // namespace mvf::net
