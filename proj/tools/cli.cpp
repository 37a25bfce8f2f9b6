#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mvf/bitparse/stream.hpp"
#include "mvf/error.hpp"
#include "mvf/evalkit/cost.hpp"
#include "mvf/evalkit/epe.hpp"
#include "mvf/evalkit/report.hpp"
#include "mvf/evalkit/synth.hpp"
#include "mvf/ingest/fields.hpp"
#include "mvf/ingest/fileio.hpp"
#include "mvf/ingest/flo.hpp"
#include "mvf/ingest/frames.hpp"
#include "mvf/ingest/mvdump.hpp"
#include "mvf/ingest/sidecars.hpp"
#include "mvf/net/model.hpp"
#include "mvf/net/train.hpp"
#include "mvf/parallel.hpp"
#include "mvf/pipeline/pipeline.hpp"
#include "mvf/pipeline/sample_io.hpp"
#include "mvf/rng.hpp"

namespace mvf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  int threads = available_threads();
  std::optional<uint64_t> seed;
  bool verbose = false;
};

// Every run logs its resolved options as one JSON line.
void log_config(std::ostream& err, const CLI::App& sub, const Globals& g, const json& resolved = nullptr) {
  json j;
  j["command"] = sub.get_name();
  j["threads"] = g.threads;
  if (g.seed) j["seed"] = *g.seed;
  json opts = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name == "--help" || name == "-h") continue;
    std::string key = opt->get_single_name();
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (res.size() == 1) {
        opts[key] = res.front();
      } else {
        opts[key] = res;
      }
    } else if (!opt->get_default_str().empty()) {
      opts[key] = opt->get_default_str();
    }
  }
  j["options"] = opts;
  if (!resolved.is_null()) j["resolved"] = resolved;
  err << "[mvf] config " << j.dump() << "\n";
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int to_int(std::string_view s, const std::string& what) {
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw UsageError("bad " + what + " \"" + std::string(s) + "\"");
  return v;
}

// "1,4,16" or "1/1,1/4,1/16".
std::vector<int> parse_downscales(const std::string& text) {
  std::vector<int> out;
  for (std::string part : split(text, ',')) {
    if (part.rfind("1/", 0) == 0) part = part.substr(2);
    const int d = to_int(part, "downscale");
    if (d < 1) throw UsageError("downscale factors must be >= 1");
    out.push_back(d);
  }
  return out;
}

ingest::FaceBox parse_box(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 4) throw UsageError("--box expects x,y,w,h");
  return ingest::FaceBox{0, to_int(parts[0], "box x"), to_int(parts[1], "box y"), to_int(parts[2], "box width"),
                         to_int(parts[3], "box height")};
}

// Substitutes the single %d / %0Nd conversion of `pattern`.
std::string format_index(const std::string& pattern, int index) {
  const std::size_t pct = pattern.find('%');
  if (pct == std::string::npos) throw UsageError("--flo-pattern needs a %d conversion");
  std::size_t end = pct + 1;
  int width = 0;
  bool zero = false;
  if (end < pattern.size() && pattern[end] == '0') {
    zero = true;
    ++end;
  }
  while (end < pattern.size() && std::isdigit(static_cast<unsigned char>(pattern[end]))) width = width * 10 + (pattern[end++] - '0');
  if (end >= pattern.size() || pattern[end] != 'd' || width > 16) throw UsageError("--flo-pattern supports only %d or %0Nd");
  if (pattern.find('%', end) != std::string::npos) throw UsageError("--flo-pattern must hold exactly one conversion");
  std::string digits = std::to_string(index);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), zero ? '0' : ' ');
  return pattern.substr(0, pct) + digits + pattern.substr(end + 1);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  ingest::write_file_text(path, text);
}

ingest::FieldSequence load_motion(const std::string& stream, const std::string& dump, const std::string& fields, int width,
                                  int height, int frame_count, int threads) {
  if (!fields.empty()) return ingest::read_fields(fields);
  if (!stream.empty()) return ingest::fields_from_stream(bitparse::parse_stream(ingest::read_file_bytes(stream)), threads);
  if (width <= 0 || height <= 0) throw UsageError("--dump needs --width and --height");
  return ingest::fields_from_dump(ingest::read_mvdump(dump), width, height, frame_count);
}

RgbImage rgb_image(const pipeline::SampleTensor& s) {
  RgbImage img(s.values.width, s.values.height);
  int c = 0;
  for (int ch = 0; ch < s.channels() && c < 3; ++ch) {
    if (s.kinds[static_cast<std::size_t>(ch)] != pipeline::ChannelKind::kRgb) continue;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const float v = std::clamp(s.values.at(ch, y, x), 0.0f, 255.0f);
        img.at(x, y)[c] = static_cast<uint8_t>(std::lround(v));
      }
    }
    ++c;
  }
  return img;
}

// First MV pair of the sample back on a one-pixel grid.
std::optional<motionfield::MotionField> motion_of(const pipeline::SampleTensor& s) {
  for (int ch = 0; ch + 1 < s.channels(); ++ch) {
    if (s.kinds[static_cast<std::size_t>(ch)] != pipeline::ChannelKind::kMvX) continue;
    motionfield::MotionField f(s.values.width, s.values.height);
    const int mask = s.mask_of[static_cast<std::size_t>(ch)];
    for (int y = 0; y < f.grid_h; ++y) {
      for (int x = 0; x < f.grid_w; ++x) {
        const std::size_t i = f.index(x, y);
        f.past_x[i] = s.values.at(ch, y, x);
        f.past_y[i] = s.values.at(ch + 1, y, x);
        f.im_past[i] = mask >= 0 ? s.values.at(mask, y, x) : (f.past_x[i] != 0 || f.past_y[i] != 0 ? 1.0f : 0.0f);
      }
    }
    return f;
  }
  return std::nullopt;
}

// ---- extract ----------------------------------------------------------------

struct ExtractOpts {
  std::string stream, dump, fields;
};

void cmd_extract(const ExtractOpts& o, const Globals& g, std::ostream& err) {
  const auto bytes = ingest::read_file_bytes(o.stream);
  const bitparse::ParsedStream parsed = bitparse::parse_stream(bytes);
  if (parsed.frames.empty()) throw TruncatedStream("empty stream: no decodable frames in " + o.stream);
  for (const auto& issue : parsed.issues) {
    if (!g.verbose) break;
    err << "[mvf] warning: frame " << issue.frame_index << " offset " << issue.stream_offset << ": "
        << to_string(issue.kind) << ": " << issue.message << "\n";
  }
  const ingest::MvDump dump = ingest::mvdump_from_stream(parsed);
  ingest::write_mvdump(fs::path(o.dump), dump);
  if (!o.fields.empty()) ingest::write_fields(o.fields, ingest::fields_from_stream(parsed, g.threads));
  std::size_t records = 0;
  int p_frames = 0;
  for (const auto& f : dump) records += f.records.size();
  for (const auto& f : parsed.frames) p_frames += f.type == bitparse::FrameType::kP ? 1 : 0;
  err << "[mvf] extract: " << parsed.frames.size() << " frames (" << p_frames << " P), " << records
      << " motion records, " << parsed.issues.size() << " slice issues"
      << (parsed.issues.empty() || g.verbose ? "" : " (details with --verbose)") << "\n";
}

// ---- rasterize --------------------------------------------------------------

struct RasterizeOpts {
  std::string stream, dump, out, viz;
  int width = 0, height = 0, frame_count = 0;
  bool future = false;
  float max_magnitude = 0;
  int cell_pixels = 4;
};

void cmd_rasterize(const RasterizeOpts& o, const Globals& g, std::ostream& err) {
  const ingest::FieldSequence seq = load_motion(o.stream, o.dump, "", o.width, o.height, o.frame_count, g.threads);
  ingest::write_fields(o.out, seq);
  if (!o.viz.empty()) {
    fs::create_directories(o.viz);
    motionfield::FlowColorOptions opts{o.future, o.max_magnitude, o.cell_pixels};
    parallel_for(seq.frames.size(), g.threads, [&](int, std::size_t i) {
      const auto& f = seq.frames[i];
      ingest::write_ppm(ingest::frame_path(o.viz, f.frame_index), motionfield::render_flow(f.field, opts));
    });
  }
  err << "[mvf] rasterize: " << seq.frames.size() << " fields of " << seq.width << "x" << seq.height << "\n";
}

// ---- preprocess -------------------------------------------------------------

struct PreprocessOpts {
  std::string manifest, config, out, split = "all", modality;
  int input_res = 0;
  int frames = 0;
};

void cmd_preprocess(const PreprocessOpts& o, const Globals& g, std::ostream& err, const CLI::App& sub) {
  net::TrainConfig cfg = o.config.empty() ? net::TrainConfig{} : net::read_train_config(o.config);
  if (!o.modality.empty()) cfg.arch.modality = pipeline::parse_modality(o.modality);
  if (o.input_res > 0) cfg.arch.input_res = o.input_res;
  if (g.seed) cfg.seed = *g.seed;
  const int k = o.frames > 0 ? o.frames : cfg.eval_frames;
  const pipeline::PreprocessConfig pre = cfg.arch.preprocess();
  log_config(err, sub, g, {{"modality", pipeline::modality_name(pre.modality)}, {"input_res", pre.input_res},
                           {"past_only", pre.past_only}, {"frames", k}, {"seed", cfg.seed}});

  const ingest::DatasetManifest manifest = ingest::read_manifest(o.manifest);
  std::vector<const ingest::ManifestEntry*> entries;
  if (o.split == "all") {
    for (const auto& e : manifest.entries) entries.push_back(&e);
  } else {
    entries = manifest.select(ingest::parse_split(o.split));
  }
  if (entries.empty()) throw EmptySplit("no videos in split \"" + o.split + "\"");
  fs::create_directories(o.out);
  const bool rgb = pre.modality == pipeline::Modality::kRgb || pre.modality == pipeline::Modality::kRgbMvIm;
  const bool motion = pre.modality != pipeline::Modality::kRgb;
  parallel_for(entries.size(), g.threads, [&](int, std::size_t i) {
    const net::Video v = net::load_video(*entries[i], rgb, motion);
    pipeline::SampleCache cache;
    cache.config = pre;
    cache.frame_indices = pipeline::sample_frames(v.frame_count, k, derive_seed(cfg.seed, i));
    for (int f : cache.frame_indices) cache.samples.push_back(pipeline::make_sample(v.input(f), pre, nullptr, 0));
    pipeline::write_samples(fs::path(o.out) / (v.id + ".mvs"), cache);
  });
  err << "[mvf] preprocess: " << entries.size() << " videos cached in " << o.out << "\n";
}

// ---- train ------------------------------------------------------------------

struct TrainOpts {
  std::string manifest, config, out, log;
  int epochs = 0;
};

void cmd_train(const TrainOpts& o, const Globals& g, std::ostream& err, const CLI::App& sub) {
  net::TrainConfig cfg = o.config.empty() ? net::TrainConfig{} : net::read_train_config(o.config);
  if (g.seed) cfg.seed = *g.seed;
  if (o.epochs > 0) cfg.epochs = o.epochs;
  cfg.validate();
  log_config(err, sub, g, json::parse(net::train_config_json(cfg)));
  const ingest::DatasetManifest manifest = ingest::read_manifest(o.manifest);
  const auto start = std::chrono::steady_clock::now();
  const net::TrainResult result = net::train(manifest, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& e : result.log) {
    err << "[mvf] epoch " << e.epoch << " train_loss " << e.train_loss << " val_loss " << e.val_loss << " val_acc "
        << e.val_acc << "\n";
  }
  if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
  net::write_checkpoint(o.out, result.best);
  if (!o.log.empty()) write_text(o.log, net::training_log_csv(result.log));
  err << "[mvf] train: best epoch " << result.best_epoch << ", " << secs << " s, checkpoint " << o.out << "\n";
}

// ---- eval -------------------------------------------------------------------

struct EvalOpts {
  std::string manifest, csv, markdown, corner;
  std::vector<std::string> checkpoints;
  int frames = 100;
};

void cmd_eval(const EvalOpts& o, const Globals& g, std::ostream& out, std::ostream& err, const CLI::App& sub) {
  const uint64_t seed = g.seed.value_or(0);
  std::vector<evalkit::TrainedCondition> conditions;
  for (const std::string& spec : o.checkpoints) {
    const std::size_t eq = spec.find('=');
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    const std::string name = eq == std::string::npos ? fs::path(path).stem().string() : spec.substr(0, eq);
    conditions.push_back({name, net::read_checkpoint(path)});
  }
  const std::string corner =
      o.corner.empty() ? upper(pipeline::modality_name(conditions.front().checkpoint.arch.modality)) : o.corner;
  log_config(err, sub, g, {{"corner", corner}, {"frames", o.frames}, {"seed", seed}});
  const ingest::DatasetManifest manifest = ingest::read_manifest(o.manifest);
  const evalkit::EvalMatrix m = evalkit::cross_forgery_eval(conditions, manifest, o.frames, seed, corner, g.threads);
  const std::string md = evalkit::render_eval_markdown(m);
  if (!o.csv.empty()) write_text(o.csv, evalkit::serialize_eval_csv(m));
  if (!o.markdown.empty()) write_text(o.markdown, md);
  out << md;
}

// ---- epe --------------------------------------------------------------------

struct EpeOpts {
  std::string fields, stream, flo_dir, flo_pattern = "%06d.flo", downscale = "1,4,16", out;
  int flo_offset = 0;
};

void cmd_epe(const EpeOpts& o, const Globals& g, std::ostream& out, std::ostream& err) {
  if (o.fields.empty() == o.stream.empty()) throw UsageError("give exactly one of --fields or --stream");
  const ingest::FieldSequence seq = load_motion(o.stream, "", o.fields, 0, 0, 0, g.threads);
  const std::vector<int> downscales = parse_downscales(o.downscale);
  std::map<int, ingest::FlowField> gt;
  for (const auto& f : seq.frames) {
    const fs::path p = fs::path(o.flo_dir) / format_index(o.flo_pattern, f.frame_index + o.flo_offset);
    if (fs::exists(p)) gt[f.frame_index] = ingest::read_flo(p);
  }
  err << "[mvf] epe: " << gt.size() << " ground-truth flows matched\n";
  const auto reports = evalkit::epe_mv_pipeline(seq, gt, downscales);
  const std::string csv = evalkit::epe_csv(reports);
  if (!o.out.empty()) write_text(o.out, csv);
  out << csv;
  for (const auto& ref : evalkit::kSintelReference) {
    err << "[mvf] reference (Sintel clean) 1/" << ref.downscale << " " << ref.method << " " << ref.epe << "\n";
  }
}

// ---- cost -------------------------------------------------------------------

struct CostOpts {
  std::string resolutions = "480x360,640x480,1280x720,1920x1080";
  std::string csv;
};

void cmd_cost(const CostOpts& o, std::ostream& out) {
  std::vector<evalkit::CostReport> reports;
  for (const std::string& r : split(o.resolutions, ',')) {
    const auto [w, h] = evalkit::parse_resolution(r);
    reports.push_back(evalkit::flop_cost(w, h));
  }
  if (!o.csv.empty()) write_text(o.csv, evalkit::cost_csv(reports));
  out << evalkit::cost_convention() << "\n\n" << evalkit::render_cost_table(reports);
}

// ---- synth ------------------------------------------------------------------

struct SynthOpts {
  std::string config, out;
  std::optional<double> noise;
};

void cmd_synth(const SynthOpts& o, const Globals& g, std::ostream& err, const CLI::App& sub) {
  evalkit::SynthConfig cfg = o.config.empty() ? evalkit::SynthConfig{} : evalkit::read_synth_config(o.config);
  if (g.seed) cfg.seed = *g.seed;
  if (o.noise) cfg.noise = *o.noise;
  cfg.validate();
  log_config(err, sub, g, json::parse(evalkit::synth_config_json(cfg)));
  const auto manifest = evalkit::synth_dataset(cfg, o.out);
  err << "[mvf] synth: " << manifest.entries.size() << " videos in " << o.out << "\n";
}

// ---- augment-preview --------------------------------------------------------

struct PreviewOpts {
  std::string frame, fields, config, box, out;
  int frame_index = -1;
  int input_res = 224;
  int count = 4;
};

void cmd_preview(const PreviewOpts& o, const Globals& g, std::ostream& err, const CLI::App& sub) {
  pipeline::AugmentationConfig aug =
      o.config.empty() ? pipeline::AugmentationConfig{} : pipeline::read_augmentation_config(o.config);
  if (g.seed) aug.seed = *g.seed;
  log_config(err, sub, g, json::parse(pipeline::augmentation_config_json(aug)));
  const RgbImage frame = ingest::read_ppm(o.frame);
  std::optional<motionfield::MotionField> field;
  if (!o.fields.empty()) {
    const ingest::FieldSequence seq = ingest::read_fields(o.fields);
    if (seq.width != frame.width || seq.height != frame.height) throw GeometryError("fields and frame sizes differ");
    for (const auto& f : seq.frames) {
      if (f.frame_index == o.frame_index) field = f.field;
    }
    if (!field) throw MissingFrame("no field for frame " + std::to_string(o.frame_index));
  }
  pipeline::FrameInput input{&frame, field ? &*field : nullptr, frame.width, frame.height,
                             o.box.empty() ? ingest::FaceBox{0, 0, 0, frame.width, frame.height} : parse_box(o.box)};
  const pipeline::PreprocessConfig pre{o.input_res, field ? pipeline::Modality::kRgbMvIm : pipeline::Modality::kRgb, false};
  fs::create_directories(o.out);
  auto emit = [&](const pipeline::SampleTensor& s, const std::string& stem) {
    ingest::write_ppm(fs::path(o.out) / (stem + "_rgb.ppm"), rgb_image(s));
    if (auto m = motion_of(s)) {
      ingest::write_ppm(fs::path(o.out) / (stem + "_flow.ppm"), motionfield::render_flow(*m, {false, 0, 1}));
    }
  };
  emit(pipeline::make_preview_sample(input, pre, nullptr, 0), "original");
  for (int i = 0; i < o.count; ++i) {
    char stem[16];
    std::snprintf(stem, sizeof(stem), "aug_%02d", i);
    emit(pipeline::make_preview_sample(input, pre, &aug, static_cast<uint64_t>(i)), stem);
  }
  err << "[mvf] augment-preview: " << o.count << " augmented views in " << o.out << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compressed-domain motion toolkit: H.264 motion extraction, motion fields, detector training and evaluation."};
  app.name(args.empty() ? "mvf" : fs::path(args.front()).filename().string());
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  Globals g;
  uint64_t seed_value = 0;
  app.add_option("--threads", g.threads, "Worker threads for per-frame stages (rasterize, preprocess, eval)")
      ->check(CLI::PositiveNumber);
  CLI::Option* seed_opt = app.add_option("--seed", seed_value, "Seed overriding the config's seed (randomized stages)");
  app.add_flag("-v,--verbose", g.verbose, "Verbose logging");

  ExtractOpts ex;
  CLI::App* extract = app.add_subcommand("extract", "Parse an Annex-B H.264 stream and write its motion vectors as an MV dump");
  extract->add_option("stream", ex.stream, "H.264 Annex-B elementary stream")->required();
  extract->add_option("--dump", ex.dump, "Output MV dump (JSON lines)")->required();
  extract->add_option("--fields", ex.fields, "Also write rasterized motion fields (.mvf)");

  RasterizeOpts ra;
  CLI::App* rasterize = app.add_subcommand("rasterize", "Rasterize motion into 4x4-cell motion fields");
  auto* ra_stream = rasterize->add_option("--stream", ra.stream, "H.264 stream to parse");
  auto* ra_dump = rasterize->add_option("--dump", ra.dump, "MV dump (needs --width and --height)");
  ra_stream->excludes(ra_dump);
  rasterize->add_option("--width", ra.width, "Frame width in pixels (with --dump)");
  rasterize->add_option("--height", ra.height, "Frame height in pixels (with --dump)");
  rasterize->add_option("--frame-count", ra.frame_count, "Minimum number of frames (with --dump)");
  rasterize->add_option("--out", ra.out, "Output motion fields (.mvf)")->required();
  rasterize->add_option("--viz", ra.viz, "Directory for flow-wheel PPM renderings, one per frame");
  rasterize->add_flag("--future", ra.future, "Render the future channel instead of past");
  rasterize->add_option("--max-magnitude", ra.max_magnitude, "Saturation magnitude in pixels (0 = per-frame maximum)");
  rasterize->add_option("--cell-pixels", ra.cell_pixels, "Rendered pixels per 4x4 cell")->check(CLI::Range(1, 64));

  PreprocessOpts pp;
  CLI::App* preprocess = app.add_subcommand("preprocess", "Cache preprocessed classifier inputs (.mvs) for manifest videos");
  preprocess->add_option("--manifest", pp.manifest, "Dataset manifest (JSON lines)")->required();
  preprocess->add_option("--config", pp.config, "Training config JSON (architecture, seed, eval_frames)");
  preprocess->add_option("--modality", pp.modality, "Override input modality: rgb, mv, mv+im, rgb+mv+im");
  preprocess->add_option("--input-res", pp.input_res, "Override input resolution");
  preprocess->add_option("--frames", pp.frames, "Frames sampled per video (default: config eval_frames)");
  preprocess->add_option("--split", pp.split, "train, val, test or all");
  preprocess->add_option("--out", pp.out, "Output directory")->required();

  TrainOpts tr;
  CLI::App* train = app.add_subcommand("train", "Train a detector; keeps the checkpoint with the lowest validation loss");
  train->add_option("--manifest", tr.manifest, "Dataset manifest (JSON lines)")->required();
  train->add_option("--config", tr.config, "Training config JSON");
  train->add_option("--epochs", tr.epochs, "Override the number of epochs");
  train->add_option("--out", tr.out, "Output checkpoint")->required();
  train->add_option("--log", tr.log, "Training log CSV (epoch,train_loss,val_loss,val_acc)");

  EvalOpts ev;
  CLI::App* eval = app.add_subcommand("eval", "Cross-forgery evaluation of checkpoints on the manifest's test split");
  eval->add_option("--manifest", ev.manifest, "Dataset manifest (JSON lines)")->required();
  eval->add_option("--checkpoint", ev.checkpoints, "NAME=PATH (column label and checkpoint); repeatable")->required();
  eval->add_option("--frames", ev.frames, "Frames averaged per video")->check(CLI::PositiveNumber);
  eval->add_option("--corner", ev.corner, "Top-left label (default: the checkpoints' modality)");
  eval->add_option("--csv", ev.csv, "Write the matrix as CSV");
  eval->add_option("--markdown", ev.markdown, "Write the Markdown table (also printed to stdout)");

  EpeOpts ep;
  CLI::App* epe = app.add_subcommand("epe", "End-point error of MV-derived flow against ground-truth .flo files");
  epe->add_option("--fields", ep.fields, "Motion fields (.mvf)");
  epe->add_option("--stream", ep.stream, "H.264 stream (parsed and rasterized)");
  epe->add_option("--flo-dir", ep.flo_dir, "Directory of ground-truth flows")->required();
  epe->add_option("--flo-pattern", ep.flo_pattern, "File name of the flow from frame i to i+1, with %d or %0Nd for i + offset");
  epe->add_option("--flo-offset", ep.flo_offset, "Added to the frame index before formatting (e.g. 1 for Sintel)");
  epe->add_option("--downscale", ep.downscale, "Comma-separated factors, e.g. 1,4,16 or 1/1,1/4,1/16");
  epe->add_option("--out", ep.out, "Write the report CSV (also printed to stdout)");

  CostOpts co;
  CLI::App* cost = app.add_subcommand("cost", "FLOP cost of MV input preparation per frame");
  cost->add_option("--resolutions", co.resolutions, "Comma-separated WxH list");
  cost->add_option("--csv", co.csv, "Write the report CSV");

  SynthOpts sy;
  CLI::App* synth = app.add_subcommand("synth", "Generate the synthetic paired real/fake dataset");
  synth->add_option("--config", sy.config, "Synthetic dataset config JSON");
  synth->add_option("--noise", sy.noise, "Override fake corruption strength (0 = fakes equal reals)");
  synth->add_option("--out", sy.out, "Output directory")->required();

  PreviewOpts pv;
  CLI::App* preview = app.add_subcommand("augment-preview", "Write before/after views of the augmentation pipeline");
  preview->add_option("--frame", pv.frame, "Frame (binary PPM)")->required();
  preview->add_option("--fields", pv.fields, "Motion fields (.mvf) to preview alongside");
  preview->add_option("--frame-index", pv.frame_index, "Field frame index (with --fields)");
  preview->add_option("--box", pv.box, "Face box x,y,w,h (default: whole frame)");
  preview->add_option("--config", pv.config, "Augmentation config JSON");
  preview->add_option("--input-res", pv.input_res, "Output resolution")->check(CLI::Range(1, 4096));
  preview->add_option("--count", pv.count, "Number of augmented views")->check(CLI::Range(0, 1000));
  preview->add_option("--out", pv.out, "Output directory")->required();

  // CLI11 consumes arguments from the back.
  std::vector<std::string> reversed;
  for (std::size_t i = args.size(); i > 1; --i) reversed.push_back(args[i - 1]);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    if (extract->parsed()) {
      log_config(err, *extract, g);
      cmd_extract(ex, g, err);
    } else if (rasterize->parsed()) {
      if (ra.stream.empty() == ra.dump.empty()) throw UsageError("give exactly one of --stream or --dump");
      log_config(err, *rasterize, g);
      cmd_rasterize(ra, g, err);
    } else if (preprocess->parsed()) {
      cmd_preprocess(pp, g, err, *preprocess);
    } else if (train->parsed()) {
      cmd_train(tr, g, err, *train);
    } else if (eval->parsed()) {
      cmd_eval(ev, g, out, err, *eval);
    } else if (epe->parsed()) {
      log_config(err, *epe, g);
      cmd_epe(ep, g, out, err);
    } else if (cost->parsed()) {
      log_config(err, *cost, g);
      cmd_cost(co, out);
    } else if (synth->parsed()) {
      cmd_synth(sy, g, err, *synth);
    } else if (preview->parsed()) {
      cmd_preview(pv, g, err, *preview);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nRun with --help for the available options.\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace mvf::cli
