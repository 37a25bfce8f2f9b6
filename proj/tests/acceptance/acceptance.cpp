// One line per acceptance criterion; exit status is nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
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
#include "mvf/pipeline/pipeline.hpp"
#include "mvf/pipeline/sample_io.hpp"
#include "reference_mvs.hpp"
#include "temp_dir.hpp"

using namespace mvf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

fs::path streams_dir() { return testing::fixture_dir() / "streams"; }

// ---- 1 ----------------------------------------------------------------------

Outcome parser_fidelity() {
  int fixtures = 0;
  long mbs = 0, matched_mbs = 0;
  double worst_time = 0;
  bool all_frames = true;
  for (const auto& fx : testing::parser_fixtures()) {
    const auto bytes = ingest::read_file_bytes(streams_dir() / (fx.name + ".h264"));
    const auto start = Clock::now();
    const auto parsed = bitparse::parse_stream(bytes);
    worst_time = std::max(worst_time, seconds_since(start));
    const auto ref = testing::load_reference(fx.name);
    if (parsed.frames.size() != ref.size() || !parsed.issues.empty()) {
      all_frames = false;
      continue;
    }
    ++fixtures;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const auto& frame = parsed.frames[i];
      const bool p = frame.type == bitparse::FrameType::kP;
      if ((ref[i].pict_type == "2") != p) all_frames = false;
      if (!p) continue;
      // Per-macroblock comparison at the reference's export granularity.
      std::map<std::pair<int, int>, std::vector<testing::RefMv>> native, expected;
      for (const auto& mv : testing::export_like_reference(frame)) native[{mv.dst_x / 16, mv.dst_y / 16}].push_back(mv);
      for (const auto& mv : ref[i].mvs) expected[{mv.dst_x / 16, mv.dst_y / 16}].push_back(mv);
      for (const auto& mb : frame.macroblocks) {
        const int wmb = frame.geometry.coded_width / 16;
        const std::pair<int, int> key{mb.mb_addr % wmb, mb.mb_addr / wmb};
        ++mbs;
        if (native[key] == expected[key]) ++matched_mbs;
      }
    }
  }
  const bool pass = fixtures >= 5 && all_frames && mbs > 0 && matched_mbs == mbs && worst_time < 1.0;
  return {pass, std::to_string(fixtures) + " fixtures, " + std::to_string(matched_mbs) + "/" + std::to_string(mbs) +
                    " P-frame macroblocks bit-exact, slowest parse " + fmt("%.3f", worst_time) + " s"};
}

// ---- 2 ----------------------------------------------------------------------

Outcome dump_native_equivalence() {
  std::vector<std::string> names;
  for (const auto& fx : testing::parser_fixtures()) {
    if (!fx.sub8x8) names.push_back(fx.name);
  }
  names.push_back("translate_128x96");
  int frames = 0, equal = 0;
  for (const auto& name : names) {
    const auto native = ingest::fields_from_stream(bitparse::parse_stream(ingest::read_file_bytes(streams_dir() / (name + ".h264"))));
    const auto dumped = ingest::fields_from_dump(ingest::read_mvdump(streams_dir() / (name + ".mvdump.jsonl")), native.width,
                                                 native.height, static_cast<int>(native.frames.size()));
    for (const auto& f : native.frames) {
      if (f.type != bitparse::FrameType::kP) continue;
      ++frames;
      const auto& d = dumped.frames.at(static_cast<std::size_t>(f.frame_index));
      if (d.field == f.field && d.type == f.type) ++equal;
    }
  }
  return {frames > 0 && equal == frames, std::to_string(names.size()) + " fixtures, " + std::to_string(equal) + "/" +
                                            std::to_string(frames) + " P-frame fields identical"};
}

// ---- 3 ----------------------------------------------------------------------

Outcome cost_model() {
  const std::pair<int, int> res[] = {{480, 360}, {640, 480}, {1280, 720}, {1920, 1080}};
  const double published[] = {0.1, 0.2, 0.6, 1.3};
  bool pass = true;
  std::string detail;
  for (int i = 0; i < 4; ++i) {
    const double v = evalkit::flop_cost(res[i].first, res[i].second).mflop_mv;
    pass = pass && std::abs(v - published[i]) <= 0.05;
    detail += std::to_string(res[i].first) + "x" + std::to_string(res[i].second) + "=" + fmt("%.4f", v) + " ";
  }
  std::mt19937 rng(11);
  bool linear = true;
  for (int i = 0; i < 1000; ++i) {
    const int w = 4 * static_cast<int>(1 + rng() % 1000);
    const int h = 4 * static_cast<int>(1 + rng() % 1000);
    const int k = static_cast<int>(1 + rng() % 8);
    linear = linear && evalkit::flop_cost(k * w, h).ops == k * evalkit::flop_cost(w, h).ops;
  }
  const bool table = evalkit::render_cost_table({evalkit::flop_cost(1280, 720)}).find("| 0.6 |") != std::string::npos;
  return {pass && linear && table, detail + "MFLOP, exact linearity " + (linear ? "holds" : "violated")};
}

// ---- 4 ----------------------------------------------------------------------

Outcome epe_correctness() {
  double worst = 0;
  for (uint32_t seed = 0; seed < 1000; ++seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> d(-10.0f, 10.0f);
    ingest::FlowField a(8, 8), b(8, 8);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a.u[i] = d(rng), a.v[i] = d(rng), b.u[i] = d(rng), b.v[i] = d(rng);
      a.valid[i] = rng() % 7 != 0;
      b.valid[i] = rng() % 7 != 0;
    }
    long double sum = 0;
    int n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a.valid[i] || !b.valid[i]) continue;
      const long double du = static_cast<long double>(a.u[i]) - b.u[i], dv = static_cast<long double>(a.v[i]) - b.v[i];
      sum += std::sqrt(du * du + dv * dv);
      ++n;
    }
    worst = std::max(worst, std::abs(evalkit::epe(a, b) - static_cast<double>(sum / n)));
  }

  // Translation clip: every frame moves by (3, -2) pixels. The ground truth
  // goes through the .flo reader as a user-supplied pair would.
  testing::TempDir dir;
  const auto seq = ingest::fields_from_stream(bitparse::parse_stream(ingest::read_file_bytes(streams_dir() / "translate_128x96.h264")));
  std::map<int, ingest::FlowField> gt;
  for (const auto& f : seq.frames) {
    ingest::FlowField flow(seq.width, seq.height);
    std::fill(flow.u.begin(), flow.u.end(), 3.0f);
    std::fill(flow.v.begin(), flow.v.end(), -2.0f);
    const fs::path p = ingest::frame_path(dir.path(), f.frame_index, ".flo");
    ingest::write_flo(p, flow);
    gt[f.frame_index] = ingest::read_flo(p);
  }
  const auto reports = evalkit::epe_mv_pipeline(seq, gt, {1, 4, 16});
  const double translation = reports.front().epe;
  const bool pass = worst <= 1e-9 && reports.front().downscale == 1 && translation <= 0.25 && reports.front().frames > 0;
  return {pass, "oracle max |diff| " + fmt("%.2e", worst) + " on 1000 random 8x8 pairs, translation EPE@1/1 " +
                    fmt("%.4f", translation) + " px over " + std::to_string(reports.front().frames) + " P-frames"};
}

// ---- 5 ----------------------------------------------------------------------

pipeline::SampleTensor random_sample(Rng& rng, int res) {
  motionfield::MotionField f(res / 4, res / 4);
  for (std::size_t i = 0; i < f.cells(); ++i) {
    if (rng.bernoulli(0.7)) {
      f.im_past[i] = 1;
      f.past_x[i] = static_cast<float>(static_cast<int>(rng.below(129)) - 64) / 4.0f;
      f.past_y[i] = static_cast<float>(static_cast<int>(rng.below(129)) - 64) / 4.0f;
    }
    if (rng.bernoulli(0.4)) {
      f.im_future[i] = 1;
      f.future_x[i] = static_cast<float>(rng.uniform(-6, 6));
      f.future_y[i] = static_cast<float>(rng.uniform(-6, 6));
    }
  }
  RgbImage img(res, res);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(rng.below(256));
  const ingest::FaceBox box{0, 0, 0, res, res};
  return pipeline::concat(pipeline::crop_resize(img, box, res), pipeline::crop_resize(f, box, res));
}

Outcome pipeline_invariants() {
  using namespace pipeline;
  Rng rng(2024);
  int failures = 0;
  int checks = 0;
  auto check = [&](bool ok) {
    ++checks;
    if (!ok) ++failures;
  };
  for (int iter = 0; iter < 50; ++iter) {
    const SampleTensor s = random_sample(rng, 32);
    // Flip involutions and vector mirroring.
    check(flip_h(flip_h(s)) == s);
    check(flip_v(flip_v(s)) == s);
    const SampleTensor h = flip_h(s);
    const SampleTensor v = flip_v(s);
    for (int c = 0; c < s.channels(); ++c) {
      const float sx = s.kinds[static_cast<std::size_t>(c)] == ChannelKind::kMvX ? -1.0f : 1.0f;
      const float sy = s.kinds[static_cast<std::size_t>(c)] == ChannelKind::kMvY ? -1.0f : 1.0f;
      for (int y = 0; y < 32; y += 5) {
        for (int x = 0; x < 32; x += 3) {
          check(h.values.at(c, y, 31 - x) == sx * s.values.at(c, y, x));
          check(v.values.at(c, 31 - y, x) == sy * s.values.at(c, y, x));
        }
      }
    }
    // IM consistency across every operation.
    const SampleTensor stdz = standardize_rgb(standardize_mv(s));
    const GridMaskParams gm{static_cast<int>(4 + rng.below(12)), rng.uniform(), static_cast<int>(rng.below(16)),
                            static_cast<int>(rng.below(16))};
    AugmentationConfig aug;
    aug.p_noise = aug.p_blur = aug.p_hsv = aug.p_fancy_pca = aug.p_channel_shift = 1.0;
    Rng aug_rng(static_cast<uint64_t>(iter));
    for (const SampleTensor* t : {&s, &h, &v, &stdz}) check(t->consistent());
    check(gridmask(stdz, gm).consistent());
    check(rgb_augment(s, aug, aug_rng).consistent());
    check(flip_h(gridmask(stdz, gm)).consistent());
    // Standardization moments on unmasked cells.
    for (int c = 0; c < stdz.channels(); ++c) {
      if (stdz.degenerate[static_cast<std::size_t>(c)] || stdz.kinds[static_cast<std::size_t>(c)] == ChannelKind::kIm) continue;
      const int m = stdz.mask_of[static_cast<std::size_t>(c)];
      double sum = 0, sq = 0;
      int n = 0;
      for (std::size_t i = 0; i < stdz.values.plane_size(); ++i) {
        if (m >= 0 && stdz.values.plane(m)[i] == 0.0f) continue;
        sum += stdz.values.plane(c)[i];
        sq += double{stdz.values.plane(c)[i]} * stdz.values.plane(c)[i];
        ++n;
      }
      const double mean = sum / n;
      check(std::abs(mean) < 1e-5);
      check(std::abs(std::sqrt(sq / n - mean * mean) - 1.0) < 1e-5);
    }
    // GridMask zero set against direct enumeration of the grid's patches.
    const SampleTensor masked = gridmask(s, gm);
    const int patch = static_cast<int>(std::lround(gm.period * gm.ratio));
    std::set<std::pair<int, int>> zeroed;
    for (int oy = gm.offset_y - 4 * gm.period; oy < 32; oy += gm.period) {
      for (int ox = gm.offset_x - 4 * gm.period; ox < 32; ox += gm.period) {
        for (int dy = 0; dy < patch; ++dy) {
          for (int dx = 0; dx < patch; ++dx) {
            if (ox + dx >= 0 && ox + dx < 32 && oy + dy >= 0 && oy + dy < 32) zeroed.insert({ox + dx, oy + dy});
          }
        }
      }
    }
    bool grid_ok = true;
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        for (int c = 0; c < s.channels(); ++c) {
          const float expect = zeroed.count({x, y}) ? 0.0f : s.values.at(c, y, x);
          grid_ok = grid_ok && masked.values.at(c, y, x) == expect;
        }
      }
    }
    check(grid_ok);
  }
  // Seeded determinism of the full per-frame pipeline.
  Rng img_rng(5);
  RgbImage img(48, 40);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(img_rng.below(256));
  motionfield::MotionField field(12, 10);
  for (std::size_t i = 0; i < field.cells(); ++i) {
    field.im_past[i] = 1;
    field.past_x[i] = static_cast<float>(img_rng.uniform(-4, 4));
  }
  AugmentationConfig aug;
  aug.p_flip_h = aug.p_flip_v = aug.p_gridmask = aug.p_noise = aug.p_blur = aug.p_hsv = 0.5;
  const FrameInput in{&img, &field, 48, 40, ingest::FaceBox{0, 6, 4, 30, 26}};
  for (uint64_t key = 0; key < 20; ++key) {
    const PreprocessConfig cfg{24, Modality::kRgbMvIm, false};
    check(make_sample(in, cfg, &aug, key) == make_sample(in, cfg, &aug, key));
  }
  return {failures == 0, std::to_string(checks - failures) + "/" + std::to_string(checks) +
                             " property checks (flips, IM consistency, moments, GridMask enumeration, determinism)"};
}

// ---- 6 ----------------------------------------------------------------------

Outcome gradient_checks() {
  using namespace net;
  double worst = 0;
  int checked = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    auto run = [&](Layer<double>& layer, Act<double> x, bool randomize) {
      layer.init(rng);
      if (randomize) testing::perturb(layer, rng);
      worst = std::max(worst, testing::check_layer(layer, std::move(x), rng));
      ++checked;
    };
    Conv3x3<double> conv1("c", 3, 4, 1);
    run(conv1, testing::random_act(rng, 2, 3, 5, 6), true);
    Conv3x3<double> conv2("c", 2, 3, 2);
    run(conv2, testing::random_act(rng, 2, 2, 7, 6), true);
    Depthwise3x3<double> dw1("d", 3, 1);
    run(dw1, testing::random_act(rng, 2, 3, 5, 5), true);
    Depthwise3x3<double> dw2("d", 3, 2);
    run(dw2, testing::random_act(rng, 2, 3, 7, 5), true);
    Pointwise<double> pw("p", 3, 5);
    run(pw, testing::random_act(rng, 2, 3, 4, 3), true);
    ScaleShift<double> ss("s", 3);
    run(ss, testing::random_act(rng, 2, 3, 3, 3), true);
    Relu<double> relu;
    run(relu, testing::random_act(rng, 2, 3, 4, 4), false);
    GlobalAvgPool<double> gap;
    run(gap, testing::random_act(rng, 2, 3, 4, 5), false);
    Linear<double> fc("f", 6, 2);
    run(fc, testing::random_act(rng, 3, 6, 1, 1), true);

    const double z = 2 * rng.normal();
    const double label = static_cast<double>(rng.below(2));
    const double h = 1e-6;
    const double fd = (bce_loss(sigmoid(z + h), label) - bce_loss(sigmoid(z - h), label)) / (2 * h);
    worst = std::max(worst, testing::rel_error(bce_logit_grad(z, label), fd));
    ++checked;

    // Whole networks, single- and two-stream.
    Architecture single;
    single.input_res = 16;
    auto m1 = make_model<double>(single, seed);
    for (Param<double>* p : m1->params()) {
      for (double& v : p->value) v += 0.1 * rng.normal();
    }
    std::vector<double> labels = {0.0, 1.0};
    worst = std::max(worst, testing::check_model(*m1, testing::random_act(rng, 2, 6, 16, 16), labels));
    Architecture two;
    two.kind = ArchKind::kTwoStream;
    two.modality = pipeline::Modality::kRgbMvIm;
    two.input_res = 16;
    auto m2 = make_model<double>(two, seed);
    for (Param<double>* p : m2->params()) {
      for (double& v : p->value) v += 0.1 * rng.normal();
    }
    worst = std::max(worst, testing::check_model(*m2, testing::random_act(rng, 2, 9, 16, 16), labels));
    checked += 2;
  }
  return {worst < 1e-3, std::to_string(checked) + " layer/model checks over 10 seeds, worst relative error " + fmt("%.2e", worst)};
}

// ---- 7 ----------------------------------------------------------------------

Outcome desk_detection() {
  testing::TempDir dir;
  const evalkit::SynthConfig synth;  // default configuration
  const auto manifest = evalkit::synth_dataset(synth, dir.path());
  const net::TrainConfig mv_cfg = net::read_train_config(dir / "train_config.json");

  auto accuracy = [&](const net::TrainConfig& cfg, double* secs, int* epochs) {
    const auto start = Clock::now();
    const net::TrainResult result = net::train(manifest, cfg);
    *secs = seconds_since(start);
    *epochs = static_cast<int>(result.log.size());
    const auto m = evalkit::cross_forgery_eval({{"all", result.best}}, manifest, cfg.eval_frames, cfg.seed,
                                               std::string(pipeline::modality_name(cfg.arch.modality)));
    return m.at("all", "all");
  };
  double mv_secs = 0, rgb_secs = 0;
  int mv_epochs = 0, rgb_epochs = 0;
  const double mv_acc = accuracy(mv_cfg, &mv_secs, &mv_epochs);
  net::TrainConfig rgb_cfg = mv_cfg;
  rgb_cfg.arch.modality = pipeline::Modality::kRgb;
  const double rgb_acc = accuracy(rgb_cfg, &rgb_secs, &rgb_epochs);
  const int clips = static_cast<int>(manifest.entries.size());
  const bool pass = clips == 300 && mv_epochs <= 8 && mv_acc >= 0.90 && mv_secs < 600 && rgb_acc <= 0.60;
  return {pass, std::to_string(clips) + " clips; MV+IM test acc " + fmt("%.3f", mv_acc) + " (" + std::to_string(mv_epochs) +
                    " epochs, " + fmt("%.1f", mv_secs) + " s), RGB test acc " + fmt("%.3f", rgb_acc) + " (" +
                    fmt("%.1f", rgb_secs) + " s)"};
}

// ---- 8 ----------------------------------------------------------------------

Outcome reporting_fidelity() {
  const std::string expected = ingest::read_file_text(testing::fixture_dir() / "reports" / "table1_mvim.md");
  const auto m = evalkit::read_eval_csv(testing::fixture_dir() / "reports" / "table1_mvim.csv");
  const std::string rendered = evalkit::render_eval_markdown(m);
  const bool cell = rendered.find("| DeepFakes | 83.53% |") != std::string::npos;
  const bool all_row = rendered.find("\n| all | ") != std::string::npos;
  const bool pass = rendered == expected && evalkit::render_eval_markdown(evalkit::published_mvim_matrix()) == expected &&
                    cell && all_row;
  return {pass, std::to_string(rendered.size()) + " bytes rendered, " + (rendered == expected ? "identical" : "DIFFERENT") +
                    " to the hand-written fixture"};
}

// ---- 9 ----------------------------------------------------------------------

struct Reader {
  std::string name;
  std::vector<std::vector<uint8_t>> seeds;
  std::function<void(std::span<const uint8_t>)> parse;
};

std::vector<uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }
std::string_view text_of(std::span<const uint8_t> b) { return {reinterpret_cast<const char*>(b.data()), b.size()}; }

std::vector<Reader> fuzz_readers(const fs::path& scratch) {
  std::vector<Reader> readers;
  std::vector<std::vector<uint8_t>> streams, dumps, fields;
  for (const auto& fx : testing::parser_fixtures()) {
    streams.push_back(ingest::read_file_bytes(streams_dir() / (fx.name + ".h264")));
    dumps.push_back(ingest::read_file_bytes(streams_dir() / (fx.name + ".mvdump.jsonl")));
    fields.push_back(ingest::serialize_fields(ingest::fields_from_stream(bitparse::parse_stream(streams.back()))));
  }
  readers.push_back({"h264 stream", streams, [](auto b) { bitparse::parse_stream(b); }});
  readers.push_back({"mv dump", dumps, [](auto b) { ingest::parse_mvdump(text_of(b)); }});
  readers.push_back({"motion fields", fields, [](auto b) { ingest::parse_fields(b); }});

  ingest::FlowField flow(5, 3);
  flow.valid[4] = 0;
  flow.u[1] = 2.5f;
  readers.push_back({"flo", {ingest::serialize_flo(flow)}, [](auto b) { ingest::parse_flo(b); }});
  RgbImage img(6, 4);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<uint8_t>(i * 7);
  readers.push_back({"ppm", {ingest::serialize_ppm(img), bytes_of("P6\n# c\n2 1\n255\nabcdef")},
                     [](auto b) { ingest::parse_ppm(b); }});
  readers.push_back({"face boxes",
                     {bytes_of(ingest::serialize_boxes({{0, 1, 2, 30, 40}, {3, 4, 5, 31, 41}}))},
                     [](auto b) { ingest::parse_boxes(text_of(b)); }});
  ingest::DatasetManifest manifest;
  ingest::ManifestEntry fake;
  fake.video_id = "a";
  fake.label = ingest::Label::kFake;
  fake.forgery = ingest::ForgeryType::kDeepFakes;
  fake.dump = scratch / "a.jsonl";
  fake.frames = scratch / "a";
  fake.boxes = scratch / "a_boxes.jsonl";
  ingest::ManifestEntry real;
  real.video_id = "b";
  real.split = ingest::Split::kTest;
  real.stream = scratch / "b.h264";
  manifest.entries = {fake, real};
  const std::vector<uint8_t> manifest_seed = bytes_of(ingest::serialize_manifest(manifest, scratch));
  readers.push_back({"manifest", {manifest_seed}, [scratch](auto b) { ingest::parse_manifest(text_of(b), scratch); }});

  net::Architecture arch;
  auto model = net::make_model<float>(arch, 3);
  net::AdamState adam;
  adam.step = 2;
  for (auto* p : model->params()) {
    adam.m.emplace_back(p->value.size(), 0.5);
    adam.v.emplace_back(p->value.size(), 0.25);
  }
  readers.push_back({"checkpoint",
                     {net::serialize_checkpoint(net::capture(arch, *model, nullptr)),
                      net::serialize_checkpoint(net::capture(arch, *model, &adam))},
                     [](auto b) { net::parse_checkpoint(b); }});
  readers.push_back({"train config",
                     {bytes_of(net::train_config_json(net::TrainConfig{})), bytes_of("{\"epochs\":3,\"augment\":{\"p_blur\":0.5}}")},
                     [](auto b) { net::parse_train_config(text_of(b)); }});
  readers.push_back({"synth config", {bytes_of(evalkit::synth_config_json(evalkit::SynthConfig{}))},
                     [](auto b) { evalkit::parse_synth_config(text_of(b)); }});
  readers.push_back({"augmentation config", {bytes_of(pipeline::augmentation_config_json(pipeline::AugmentationConfig{}))},
                     [](auto b) { pipeline::parse_augmentation_config(text_of(b)); }});
  readers.push_back({"eval csv", {bytes_of(evalkit::serialize_eval_csv(evalkit::published_mvim_matrix()))},
                     [](auto b) { evalkit::parse_eval_csv(text_of(b)); }});
  Rng rng(1);
  RgbImage frame(16, 16);
  for (auto& p : frame.pixels) p = static_cast<uint8_t>(rng.below(256));
  motionfield::MotionField mf(4, 4);
  mf.im_past.assign(mf.cells(), 1.0f);
  mf.past_x[3] = 1.5f;
  pipeline::SampleCache cache;
  cache.config = {8, pipeline::Modality::kRgbMvIm, false};
  cache.frame_indices = {2};
  cache.samples.push_back(pipeline::make_sample({&frame, &mf, 16, 16, {0, 0, 0, 16, 16}}, cache.config, nullptr, 0));
  readers.push_back({"sample cache", {pipeline::serialize_samples(cache)}, [](auto b) { pipeline::parse_samples(b); }});
  return readers;
}

std::vector<uint8_t> mutate(std::mt19937_64& rng, const Reader& r) {
  const auto& seed = r.seeds[rng() % r.seeds.size()];
  std::vector<uint8_t> out;
  auto pos = [&](std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(rng() % n); };
  switch (rng() % 6) {
    case 0: {  // random bytes
      out.resize(rng() % 512);
      for (auto& b : out) b = static_cast<uint8_t>(rng());
      break;
    }
    case 1:  // truncation
      out.assign(seed.begin(), seed.begin() + static_cast<std::ptrdiff_t>(pos(seed.size() + 1)));
      break;
    case 2: {  // bit flips
      out = seed;
      const int flips = 1 + static_cast<int>(rng() % 8);
      for (int i = 0; i < flips && !out.empty(); ++i) out[pos(out.size())] ^= static_cast<uint8_t>(1u << (rng() % 8));
      break;
    }
    case 3: {  // boundary values, biased to the first 64 bytes where headers live
      out = seed;
      const uint8_t values[] = {0x00, 0xFF, 0x7F, 0x80, '-', '9', '"', '{', ',', '\n'};
      const int edits = 1 + static_cast<int>(rng() % 4);
      for (int i = 0; i < edits && !out.empty(); ++i) {
        const std::size_t at = rng() % 2 ? pos(std::min<std::size_t>(out.size(), 64)) : pos(out.size());
        out[at] = values[rng() % std::size(values)];
      }
      break;
    }
    case 4: {  // chunk deletion or duplication
      out = seed;
      if (out.empty()) break;
      const std::size_t a = pos(out.size());
      const std::size_t len = std::min<std::size_t>(out.size() - a, 1 + rng() % 64);
      if (rng() % 2) {
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(a), out.begin() + static_cast<std::ptrdiff_t>(a + len));
      } else {
        std::vector<uint8_t> chunk(out.begin() + static_cast<std::ptrdiff_t>(a), out.begin() + static_cast<std::ptrdiff_t>(a + len));
        out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos(out.size())), chunk.begin(), chunk.end());
      }
      break;
    }
    default: {  // truncated seed followed by random tail
      out.assign(seed.begin(), seed.begin() + static_cast<std::ptrdiff_t>(pos(seed.size() + 1)));
      const std::size_t tail = rng() % 64;
      for (std::size_t i = 0; i < tail; ++i) out.push_back(static_cast<uint8_t>(rng()));
    }
  }
  return out;
}

Outcome fuzz_robustness() {
  testing::TempDir scratch;
  const auto readers = fuzz_readers(scratch.path());
  constexpr int kInputs = 100000;
  std::mt19937_64 rng(0xF0221);
  std::map<std::string, int> untyped;
  std::map<ErrorKind, int> kinds;
  int accepted = 0;
  for (int i = 0; i < kInputs; ++i) {
    const Reader& r = readers[static_cast<std::size_t>(i) % readers.size()];
    const std::vector<uint8_t> input = mutate(rng, r);
    try {
      r.parse(input);
      ++accepted;
    } catch (const Error& e) {
      ++kinds[e.kind()];
    } catch (const std::exception& e) {
      ++untyped[r.name + ": " + e.what()];
    } catch (...) {
      ++untyped[r.name + ": unknown exception"];
    }
  }
  int bad = 0;
  for (const auto& [what, n] : untyped) {
    bad += n;
    std::cerr << "  untyped failure x" << n << " " << what << "\n";
  }
  return {bad == 0, std::to_string(kInputs) + " inputs over " + std::to_string(readers.size()) + " readers: " +
                        std::to_string(accepted) + " accepted, " + std::to_string(kInputs - accepted - bad) +
                        " typed errors, " + std::to_string(bad) + " untyped, 0 crashes"};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number, e.g. "acceptance 3 8".
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"parser fidelity", parser_fidelity},
      {"dump/native equivalence", dump_native_equivalence},
      {"cost model", cost_model},
      {"EPE correctness", epe_correctness},
      {"pipeline invariants", pipeline_invariants},
      {"gradient checks", gradient_checks},
      {"desk-scale detection", desk_detection},
      {"reporting fidelity", reporting_fidelity},
      {"robustness", fuzz_robustness},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(n)) continue;
    Outcome o;
    const auto start = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << n << " " << criteria[i].first << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.detail
              << "; " << fmt("%.1f", seconds_since(start)) << " s)" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
