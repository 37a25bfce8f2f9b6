#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "mvf/bitparse/stream.hpp"
#include "mvf/error.hpp"
#include "mvf/evalkit/cost.hpp"
#include "mvf/evalkit/epe.hpp"
#include "mvf/evalkit/report.hpp"
#include "mvf/evalkit/synth.hpp"
#include "mvf/ingest/fileio.hpp"
#include "mvf/net/train.hpp"
#include "mvf/rng.hpp"
#include "reference_mvs.hpp"
#include "temp_dir.hpp"

using namespace mvf;
using namespace mvf::evalkit;

namespace {

FlowField random_flow(std::mt19937& rng, int w, int h, bool holes) {
  std::uniform_real_distribution<float> d(-8.0f, 8.0f);
  FlowField f(w, h);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.u[i] = d(rng);
    f.v[i] = d(rng);
    f.valid[i] = holes && rng() % 5 == 0 ? 0 : 1;
    if (!f.valid[i]) f.u[i] = f.v[i] = 0;
  }
  return f;
}

FlowField constant_flow(int w, int h, float u, float v) {
  FlowField f(w, h);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.u[i] = u;
    f.v[i] = v;
    f.valid[i] = 1;
  }
  return f;
}

// Per-pixel oracle with long double accumulation.
double oracle_epe(const FlowField& a, const FlowField& b) {
  long double sum = 0;
  long n = 0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      const std::size_t p = a.index(x, y);
      if (!a.valid[p] || !b.valid[p]) continue;
      const long double du = static_cast<long double>(a.u[p]) - b.u[p];
      const long double dv = static_cast<long double>(a.v[p]) - b.v[p];
      sum += std::sqrt(du * du + dv * dv);
      ++n;
    }
  }
  return static_cast<double>(sum / n);
}

FlowField upsample_nearest(const FlowField& small, int factor, int w, int h) {
  FlowField out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t s = small.index(x / factor, y / factor);
      const std::size_t p = out.index(x, y);
      out.u[p] = small.u[s] * factor;
      out.v[p] = small.v[s] * factor;
      out.valid[p] = small.valid[s];
    }
  }
  return out;
}

ingest::FieldSequence fixture_fields(const std::string& name) {
  const auto bytes = ingest::read_file_bytes(testing::fixture_dir() / "streams" / (name + ".h264"));
  return ingest::fields_from_stream(bitparse::parse_stream(bytes));
}

std::map<int, FlowField> constant_gt(const ingest::FieldSequence& seq, float u, float v) {
  std::map<int, FlowField> gt;
  for (const auto& f : seq.frames) gt[f.frame_index] = constant_flow(seq.width, seq.height, u, v);
  return gt;
}

net::Video fake_video(std::string id, ingest::Label label, ingest::ForgeryType t) {
  net::Video v;
  v.id = std::move(id);
  v.label = label;
  v.forgery = t;
  return v;
}

}  // namespace

TEST_CASE("epe examples") {
  const FlowField a = constant_flow(4, 3, 1.0f, -2.0f);
  CHECK(epe(a, a) == 0.0);
  CHECK(epe(a, constant_flow(4, 3, 4.0f, 2.0f)) == doctest::Approx(5.0).epsilon(1e-12));
  FlowField holes = constant_flow(4, 3, 4.0f, 2.0f);
  holes.valid[0] = 0;
  holes.u[0] = holes.v[0] = 0;
  CHECK(epe(a, holes) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("epe matches per-pixel oracle on random 8x8 fields") {
  for (uint32_t seed = 0; seed < 200; ++seed) {
    std::mt19937 rng(seed);
    const FlowField a = random_flow(rng, 8, 8, seed % 2 == 1);
    const FlowField b = random_flow(rng, 8, 8, seed % 3 == 1);
    const double e = epe(a, b);
    CHECK(std::abs(e - oracle_epe(a, b)) <= 1e-9);
    CHECK(e >= 0.0);
    CHECK(e == epe(b, a));
    CHECK(epe(a, a) == 0.0);
  }
}

TEST_CASE("epe errors") {
  CHECK_THROWS_AS(epe(FlowField(4, 4), FlowField(4, 5)), GridMismatch);
  FlowField none(4, 4);
  none.valid.assign(none.size(), 0);
  CHECK_THROWS_AS(epe(none, constant_flow(4, 4, 0, 0)), GridMismatch);
  CHECK_THROWS_AS(downscale_flow(FlowField(4, 4), 0), GridMismatch);
}

TEST_CASE("downscale averages valid pixels and scales vectors") {
  FlowField f(3, 2);
  // Row 0: (2,0) (4,0) (8,8); row 1: (6,0) invalid (0,4)
  const float us[] = {2, 4, 8, 6, 0, 0};
  const float vs[] = {0, 0, 8, 0, 0, 4};
  for (int i = 0; i < 6; ++i) {
    f.u[i] = us[i];
    f.v[i] = vs[i];
    f.valid[i] = i == 4 ? 0 : 1;
  }
  const FlowField d = downscale_flow(f, 2);
  REQUIRE(d.width == 2);
  REQUIRE(d.height == 1);
  CHECK(d.u[0] == doctest::Approx(2.0));  // (2+4+6)/3/2
  CHECK(d.v[0] == 0.0f);
  CHECK(d.u[1] == doctest::Approx(2.0));  // (8+0)/2/2
  CHECK(d.v[1] == doctest::Approx(3.0));  // (8+4)/2/2
  CHECK(d.valid[0] == 1);
  CHECK(d.valid[1] == 1);

  FlowField empty(2, 2);
  empty.valid.assign(empty.size(), 0);
  CHECK(downscale_flow(empty, 2).valid[0] == 0);
  CHECK(downscale_flow(f, 1) == f);
}

TEST_CASE("downscale-upsample roundtrip error") {
  // Constant fields survive exactly; the smooth field's error is pinned.
  const FlowField c = constant_flow(32, 24, 1.5f, -0.75f);
  for (int factor : {4, 16}) CHECK(epe(upsample_nearest(downscale_flow(c, factor), factor, 32, 24), c) == 0.0);

  FlowField smooth(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      const std::size_t p = smooth.index(x, y);
      smooth.u[p] = 0.25f * static_cast<float>(x);
      smooth.v[p] = 0.0f;
      smooth.valid[p] = 1;
    }
  }
  // Within each 4-pixel block the x ramp deviates from its mean by 0.375 or
  // 0.125, so the mean error is 0.25.
  CHECK(epe(upsample_nearest(downscale_flow(smooth, 4), 4, 32, 32), smooth) == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("flow_from_motion negates past motion and expands cells") {
  motionfield::MotionField m(2, 1);
  m.past_x = {1.25f, 0.0f};
  m.past_y = {-0.5f, 0.0f};
  m.im_past = {1.0f, 0.0f};
  const FlowField f = flow_from_motion(m, 7, 3);
  CHECK(f.u[f.index(0, 0)] == -1.25f);
  CHECK(f.v[f.index(3, 2)] == 0.5f);
  CHECK(f.u[f.index(4, 0)] == 0.0f);
  CHECK_FALSE(std::signbit(f.u[f.index(6, 2)]));
  CHECK_THROWS_AS(flow_from_motion(m, 9, 3), GridMismatch);
}

TEST_CASE("translation clip: MV-derived flow within quarter-pel of ground truth") {
  const auto seq = fixture_fields("translate_128x96");
  const auto reports = epe_mv_pipeline(seq, constant_gt(seq, 3.0f, -2.0f), {1, 4, 16});
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].downscale == 1);
  CHECK(reports[0].frames > 0);
  CHECK(reports[0].epe <= 0.25);
  for (const auto& r : reports) CHECK(r.epe >= 0.0);
}

TEST_CASE("static clip: EPE near zero") {
  const auto seq = fixture_fields("static_64x64");
  const auto reports = epe_mv_pipeline(seq, constant_gt(seq, 0.0f, 0.0f), {1});
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].epe <= 0.25);
}

TEST_CASE("epe pipeline needs P-frames with ground truth") {
  const auto seq = fixture_fields("static_64x64");
  CHECK_THROWS_AS(epe_mv_pipeline(seq, {}), NoPFrames);
  ingest::FieldSequence only_i;
  only_i.width = seq.width;
  only_i.height = seq.height;
  only_i.frames.push_back(seq.frames.front());
  CHECK_THROWS_AS(epe_mv_pipeline(only_i, constant_gt(seq, 0, 0)), NoPFrames);
}

TEST_CASE("epe csv") {
  const std::string csv = epe_csv({{4, "MVs", 0.5, 3}});
  CHECK(csv.rfind("downscale,method,epe,frames\n", 0) == 0);
  CHECK(csv.find("1/4,MVs,") != std::string::npos);
}

TEST_CASE("flop cost reproduces published MV column") {
  const std::pair<int, int> res[] = {{480, 360}, {640, 480}, {1280, 720}, {1920, 1080}};
  const double published[] = {0.1, 0.2, 0.6, 1.3};
  for (int i = 0; i < 4; ++i) {
    const CostReport r = flop_cost(res[i].first, res[i].second);
    CHECK(std::abs(r.mflop_mv - published[i]) <= 0.05);
    CHECK(r.mflop_flow_reference.has_value());
  }
  CHECK_FALSE(flop_cost(100, 100).mflop_flow_reference.has_value());
}

TEST_CASE("flop cost is exactly linear in pixel count") {
  std::mt19937 rng(3);
  for (int i = 0; i < 100; ++i) {
    const int w = 4 * static_cast<int>(1 + rng() % 500);
    const int h = 4 * static_cast<int>(1 + rng() % 500);
    const double base = flop_cost(w, h).mflop_mv;
    CHECK(flop_cost(2 * w, h).mflop_mv == 2 * base);
    CHECK(flop_cost(w, 4 * h).mflop_mv == 4 * base);
    CHECK(flop_cost(w, h).mflop_mv == static_cast<double>(w) * h / 16.0 * kOpsPerCell / 1e6);
    const int k = static_cast<int>(1 + rng() % 8);
    CHECK(flop_cost(k * w, h).ops == k * flop_cost(w, h).ops);
    CHECK(flop_cost(w, h).ops == static_cast<double>(w / 4) * (h / 4) * kOpsPerCell);
  }
}

TEST_CASE("cost table") {
  const std::string table = render_cost_table({flop_cost(1280, 720)});
  CHECK(table.find("| Resolution | OF MFLOP | MV MFLOP |") == 0);
  CHECK(table.find("| 1280×720 | 783.5 · 10^3 | 0.6 |") != std::string::npos);
  CHECK(cost_csv({flop_cost(640, 480)}).find("640,480,") != std::string::npos);
  CHECK(parse_resolution("640x480") == std::pair{640, 480});
  CHECK(parse_resolution("1920×1080") == std::pair{1920, 1080});
  CHECK_THROWS_AS(parse_resolution("640"), FormatError);
  CHECK_THROWS_AS(parse_resolution("0x480"), FormatError);
  CHECK_FALSE(cost_convention().empty());
}

TEST_CASE("published matrix renders byte-for-byte") {
  const std::string expected = ingest::read_file_text(testing::fixture_dir() / "reports" / "table1_mvim.md");
  CHECK(render_eval_markdown(published_mvim_matrix()) == expected);
  const EvalMatrix m = read_eval_csv(testing::fixture_dir() / "reports" / "table1_mvim.csv");
  CHECK(m == published_mvim_matrix());
  CHECK(render_eval_markdown(m) == expected);
  CHECK(m.at("DeepFakes", "DeepFakes") == 0.8353);
  CHECK(m.at("all", "all") == 0.6303);
}

TEST_CASE("eval csv roundtrip and errors") {
  const EvalMatrix m = published_mvim_matrix();
  CHECK(parse_eval_csv(serialize_eval_csv(m)) == m);
  CHECK_THROWS_AS(parse_eval_csv(""), FormatError);
  CHECK_THROWS_AS(parse_eval_csv("a,b,c\n"), FormatError);
  CHECK_THROWS_AS(parse_eval_csv("x,size,A\nr,1,0.5,0.5\n"), FormatError);
  CHECK_THROWS_AS(parse_eval_csv("x,size,A\nr,1,1.5\n"), FormatError);
  CHECK_THROWS_AS(parse_eval_csv("x,size,A\nr,-1,0.5\n"), FormatError);
  CHECK_THROWS_AS(parse_eval_csv("x,size,A\nr,1,abc\n"), FormatError);
  CHECK_THROWS_AS(m.at("Nope", "all"), FormatError);
}

TEST_CASE("cross-forgery matrix semantics") {
  using ingest::ForgeryType;
  using ingest::Label;
  std::vector<net::Video> videos;
  for (int i = 0; i < 4; ++i) videos.push_back(fake_video("r" + std::to_string(i), Label::kReal, ForgeryType::kPristine));
  for (int i = 0; i < 3; ++i) videos.push_back(fake_video("d" + std::to_string(i), Label::kFake, ForgeryType::kDeepFakes));
  for (int i = 0; i < 2; ++i) videos.push_back(fake_video("n" + std::to_string(i), Label::kFake, ForgeryType::kNeuralTextures));

  const VideoPredictor oracle = [](const net::Video& v) { return v.label == Label::kFake ? 0.9 : 0.1; };
  const VideoPredictor half = [](const net::Video&) { return 0.5; };
  // Fakes are caught only when their id ends in '0'.
  const VideoPredictor partial = [](const net::Video& v) {
    return v.label == Label::kReal ? 0.0 : (v.id.back() == '0' ? 1.0 : 0.0);
  };
  const EvalMatrix m = cross_forgery_matrix({{"perfect", oracle}, {"half", half}, {"partial", partial}}, videos, "MV+IM");
  REQUIRE(m.rows == std::vector<std::string>{"DeepFakes", "NeuralTextures", "Pristine", "all"});
  CHECK(m.row_sizes == std::vector<int>{3, 2, 4, 9});
  for (const auto& r : m.rows) CHECK(m.at(r, "perfect") == 1.0);
  CHECK(m.at("DeepFakes", "half") == 1.0);
  CHECK(m.at("Pristine", "half") == 0.0);
  CHECK(m.at("all", "half") == doctest::Approx(5.0 / 9.0));
  CHECK(m.at("DeepFakes", "partial") == doctest::Approx(1.0 / 3.0));
  CHECK(m.at("NeuralTextures", "partial") == 0.5);
  CHECK(m.at("all", "partial") == doctest::Approx(6.0 / 9.0));
  CHECK(m.all_row_consistent());
  m.validate();

  EvalMatrix broken = m;
  broken.cells.back()[0] = 0.5;
  CHECK_FALSE(broken.all_row_consistent());

  std::vector<net::Video> reals(videos.begin(), videos.begin() + 4);
  CHECK_THROWS_AS(cross_forgery_matrix({{"x", half}}, reals, "MV"), EmptySplit);
  std::vector<net::Video> fakes(videos.begin() + 4, videos.end());
  CHECK_THROWS_AS(cross_forgery_matrix({{"x", half}}, fakes, "MV"), EmptySplit);
  CHECK_THROWS_AS(cross_forgery_eval({}, ingest::DatasetManifest{}, 4, 0, "MV"), MissingCheckpoint);
}

TEST_CASE("synth config json") {
  SynthConfig c;
  c.seed = 9;
  c.noise = 0.5;
  c.train_pairs = 3;
  CHECK(parse_synth_config(synth_config_json(c)) == c);
  CHECK(parse_synth_config("{}") == SynthConfig{});
  CHECK_THROWS_AS(parse_synth_config("{\"bogus\": 1}"), FormatError);
  CHECK_THROWS_AS(parse_synth_config("{\"width\": 30}"), FormatError);
  CHECK_THROWS_AS(parse_synth_config("{\"noise\": -1}"), FormatError);
}

TEST_CASE("synth dataset is deterministic and noise 0 makes fakes equal reals") {
  SynthConfig c;
  c.seed = 5;
  c.train_pairs = 3;
  c.val_pairs = 1;
  c.test_pairs = 1;
  c.frames = 4;
  testing::TempDir a, b, z;
  const auto ma = synth_dataset(c, a.path());
  synth_dataset(c, b.path());
  CHECK(ma.entries.size() == 10);
  for (const auto& e : std::filesystem::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), a.path());
    if (rel == "manifest.jsonl") continue;  // holds absolute paths
    CHECK(ingest::read_file_bytes(e.path()) == ingest::read_file_bytes(b.path() / rel));
  }

  c.noise = 0;
  synth_dataset(c, z.path());
  for (int pair = 0; pair < 5; ++pair) {
    char name[16];
    std::snprintf(name, sizeof(name), "%04d", pair);
    const auto dir = z.path() / "clips" / name;
    CHECK(ingest::read_file_bytes(dir / "real.mvdump.jsonl") == ingest::read_file_bytes(dir / "fake.mvdump.jsonl"));
    const auto noisy = a.path() / "clips" / name;
    CHECK(ingest::read_file_bytes(noisy / "real.mvdump.jsonl") != ingest::read_file_bytes(noisy / "fake.mvdump.jsonl"));
  }
}

TEST_CASE("synth videos load and expose a motion difference") {
  SynthConfig c;
  c.train_pairs = 2;
  c.val_pairs = 1;
  c.test_pairs = 1;
  c.frames = 3;
  testing::TempDir dir;
  const auto manifest = synth_dataset(c, dir.path());
  const auto entries = manifest.select(ingest::Split::kTrain);
  REQUIRE(entries.size() == 4);
  const auto videos = net::load_videos(entries, net::Architecture{});
  for (const auto& v : videos) {
    CHECK(v.frame_count == 3);
    CHECK(v.fields.width == 64);
    CHECK(v.fields.frames[0].type == bitparse::FrameType::kI);
    CHECK(v.fields.frames[1].type == bitparse::FrameType::kP);
    CHECK(v.fields.frames[1].field.consistent());
  }
  CHECK(videos[0].label != videos[1].label);
  CHECK(videos[0].fields.frames[1].field != videos[1].fields.frames[1].field);
}

namespace {

struct FrozenBatch {
  net::Act<float> batch;
  std::vector<float> labels;
};

FrozenBatch frozen_batch(const std::vector<net::Video>& videos, const net::Architecture& arch) {
  std::vector<pipeline::SampleTensor> samples;
  FrozenBatch out;
  for (const auto& v : videos) {
    for (int f = 1; f < v.frame_count; ++f) {
      samples.push_back(pipeline::make_sample(v.input(f), arch.preprocess(), nullptr, 0));
      out.labels.push_back(v.label == ingest::Label::kFake ? 1.0f : 0.0f);
    }
  }
  std::vector<const pipeline::SampleTensor*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  out.batch = net::make_batch<float>(ptrs);
  return out;
}

double batch_loss(const std::vector<float>& z, const std::vector<float>& labels) {
  double sum = 0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += net::bce_loss<double>(net::sigmoid(z[i]), labels[i]);
  return sum / static_cast<double>(z.size());
}

}  // namespace

TEST_CASE("loss on a frozen synthetic batch does not increase over 50 Adam steps") {
  SynthConfig c;
  c.train_pairs = 4;
  c.val_pairs = 1;
  c.test_pairs = 1;
  c.frames = 3;
  testing::TempDir dir;
  const auto manifest = synth_dataset(c, dir.path());
  net::Architecture arch;
  arch.input_res = 32;
  const auto videos = net::load_videos(manifest.select(ingest::Split::kTrain), arch);
  const FrozenBatch fb = frozen_batch(videos, arch);

  constexpr int kSteps = 50;
  std::vector<double> mean(kSteps + 1, 0.0);
  for (uint64_t seed = 0; seed < 5; ++seed) {
    auto model = net::make_model<float>(arch, seed);
    const auto params = model->params();
    net::AdamState state;
    for (int step = 0; step <= kSteps; ++step) {
      model->zero_grad();
      const std::vector<float> z = model->logits(fb.batch);
      mean[step] += batch_loss(z, fb.labels) / 5.0;
      if (step == kSteps) break;
      std::vector<float> grad(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) grad[i] = net::bce_logit_grad(z[i], fb.labels[i]) / static_cast<float>(z.size());
      model->backward(grad);
      net::adam_step<float>(params, state, net::AdamConfig{});
    }
  }
  for (int step = 1; step <= kSteps; ++step) CHECK(mean[step] <= mean[step - 1]);
  CHECK(mean[kSteps] < mean[0]);
}

TEST_CASE("trained two-stream output depends on both branches") {
  SynthConfig c;
  c.train_pairs = 4;
  c.val_pairs = 1;
  c.test_pairs = 1;
  c.frames = 3;
  testing::TempDir dir;
  const auto manifest = synth_dataset(c, dir.path());
  net::TrainConfig cfg;
  cfg.arch.kind = net::ArchKind::kTwoStream;
  cfg.arch.modality = pipeline::Modality::kRgbMvIm;
  cfg.arch.input_res = 32;
  cfg.epochs = 1;
  cfg.eval_frames = 2;
  const auto result = net::train(manifest, cfg);
  auto model = net::load_model<float>(result.best);
  const auto videos = net::load_videos(manifest.select(ingest::Split::kTest), cfg.arch);
  const FrozenBatch fb = frozen_batch(videos, cfg.arch);
  const std::vector<float> base = model->forward(fb.batch);

  auto zeroed = [&](int c0, int c1) {
    net::Act<float> b = fb.batch;
    const std::size_t plane = static_cast<std::size_t>(b.h) * b.w;
    for (int n = 0; n < b.n; ++n) {
      for (int ch = c0; ch < c1; ++ch) {
        const std::size_t off = (static_cast<std::size_t>(n) * b.c + ch) * plane;
        std::fill(b.data.begin() + static_cast<std::ptrdiff_t>(off), b.data.begin() + static_cast<std::ptrdiff_t>(off + plane), 0.0f);
      }
    }
    return model->forward(b);
  };
  CHECK(zeroed(0, 3) != base);
  CHECK(zeroed(3, fb.batch.c) != base);
}
