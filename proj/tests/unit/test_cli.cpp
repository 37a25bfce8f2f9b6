#include <map>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "mvf/ingest/fileio.hpp"
#include "reference_mvs.hpp"
#include "temp_dir.hpp"

using namespace mvf;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "mvf");
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string stream_fixture(const std::string& name) {
  return (testing::fixture_dir() / "streams" / (name + ".h264")).string();
}

}  // namespace

TEST_CASE("cli usage errors exit 1") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"cost", "--bogus"}).code == cli::kExitUsage);
  CHECK(run({"nope"}).code == cli::kExitUsage);
  CHECK(run({"extract", "x.h264"}).code == cli::kExitUsage);  // --dump missing
  CHECK(run({"--threads", "0", "cost"}).code == cli::kExitUsage);
  CHECK(run({"epe", "--flo-dir", "x"}).code == cli::kExitUsage);  // no motion source
  CHECK(run({"cost", "--help"}).code == cli::kExitOk);
}

TEST_CASE("cli help documents every flag") {
  const std::map<std::string, std::vector<std::string>> flags = {
      {"extract", {"--dump", "--fields"}},
      {"rasterize", {"--stream", "--dump", "--width", "--height", "--frame-count", "--out", "--viz", "--future",
                     "--max-magnitude", "--cell-pixels"}},
      {"preprocess", {"--manifest", "--config", "--modality", "--input-res", "--frames", "--split", "--out"}},
      {"train", {"--manifest", "--config", "--epochs", "--out", "--log"}},
      {"eval", {"--manifest", "--checkpoint", "--frames", "--corner", "--csv", "--markdown"}},
      {"epe", {"--fields", "--stream", "--flo-dir", "--flo-pattern", "--flo-offset", "--downscale", "--out"}},
      {"cost", {"--resolutions", "--csv"}},
      {"synth", {"--config", "--noise", "--out"}},
      {"augment-preview", {"--frame", "--fields", "--frame-index", "--box", "--config", "--input-res", "--count", "--out"}},
  };
  for (const auto& [cmd, names] : flags) {
    const Result r = run({cmd, "--help"});
    CHECK(r.code == cli::kExitOk);
    for (const auto& n : names) {
      CAPTURE(cmd);
      CAPTURE(n);
      CHECK(r.out.find(n) != std::string::npos);
    }
  }
  const Result top = run({"--help"});
  for (const char* n : {"--threads", "--seed", "--verbose"}) CHECK(top.out.find(n) != std::string::npos);
}

TEST_CASE("cli cost reproduces the 1280x720 row") {
  const Result r = run({"cost", "--resolutions", "1280x720"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("| 1280×720 | 783.5 · 10^3 | 0.6 |") != std::string::npos);
  CHECK(r.err.find("[mvf] config ") != std::string::npos);
  CHECK(run({"cost", "--resolutions", "12x"}).code == cli::kExitData);
}

TEST_CASE("cli extract reports data errors with exit 2") {
  testing::TempDir dir;
  ingest::write_file_text(dir / "empty.h264", "");
  const Result r = run({"extract", (dir / "empty.h264").string(), "--dump", (dir / "d.jsonl").string()});
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find("empty stream") != std::string::npos);
  CHECK(run({"extract", (dir / "missing.h264").string(), "--dump", (dir / "d.jsonl").string()}).code == cli::kExitData);
}

TEST_CASE("cli extract and rasterize agree across sources and thread counts") {
  testing::TempDir dir;
  const std::string s = stream_fixture("moving_block_64x64");
  REQUIRE(run({"extract", s, "--dump", (dir / "d.jsonl").string(), "--fields", (dir / "a.mvf").string()}).code == 0);
  REQUIRE(run({"--threads", "3", "rasterize", "--stream", s, "--out", (dir / "b.mvf").string(), "--viz",
               (dir / "viz").string()})
              .code == 0);
  REQUIRE(run({"rasterize", "--dump", (dir / "d.jsonl").string(), "--width", "64", "--height", "64", "--out",
               (dir / "c.mvf").string()})
              .code == 0);
  const auto a = ingest::read_file_bytes(dir / "a.mvf");
  CHECK(a == ingest::read_file_bytes(dir / "b.mvf"));
  CHECK(a == ingest::read_file_bytes(dir / "c.mvf"));
  CHECK(std::filesystem::exists(dir / "viz" / "000001.ppm"));
  CHECK(run({"rasterize", "--stream", s, "--dump", "x", "--out", "y"}).code == cli::kExitUsage);
  CHECK(run({"rasterize", "--dump", (dir / "d.jsonl").string(), "--out", (dir / "e.mvf").string()}).code ==
        cli::kExitUsage);
}

TEST_CASE("cli synth, train, eval chain is reproducible") {
  testing::TempDir dir;
  ingest::write_file_text(dir / "synth.json", R"({"train_pairs":4,"val_pairs":1,"test_pairs":2,"frames":3})");
  ingest::write_file_text(dir / "train.json", R"({"input_res":32,"epochs":2,"eval_frames":3})");
  auto chain = [&](const std::string& tag, const std::string& threads) {
    const std::string ds = (dir / ("ds" + tag)).string();
    REQUIRE(run({"--seed", "7", "synth", "--config", (dir / "synth.json").string(), "--out", ds}).code == 0);
    const std::string ck = (dir / ("ck" + tag + ".bin")).string();
    REQUIRE(run({"--seed", "7", "train", "--manifest", ds + "/manifest.jsonl", "--config", (dir / "train.json").string(),
                 "--out", ck, "--log", (dir / ("log" + tag + ".csv")).string()})
                .code == 0);
    const Result ev = run({"--seed", "7", "--threads", threads, "eval", "--manifest", ds + "/manifest.jsonl",
                           "--checkpoint", "all=" + ck, "--frames", "3", "--csv", (dir / ("ev" + tag + ".csv")).string()});
    REQUIRE(ev.code == 0);
    return ev.out;
  };
  const std::string first = chain("1", "1");
  const std::string second = chain("2", "2");
  CHECK(first == second);
  CHECK(first.rfind("| MV+IM | all |", 0) == 0);
  CHECK(ingest::read_file_bytes(dir / "ck1.bin") == ingest::read_file_bytes(dir / "ck2.bin"));
  CHECK(ingest::read_file_text(dir / "log1.csv") == ingest::read_file_text(dir / "log2.csv"));
  CHECK(ingest::read_file_text(dir / "ev1.csv") == ingest::read_file_text(dir / "ev2.csv"));

  const std::string ds = (dir / "ds1").string();
  CHECK(run({"preprocess", "--manifest", ds + "/manifest.jsonl", "--config", (dir / "train.json").string(), "--split",
             "test", "--out", (dir / "cache").string()})
            .code == 0);
  CHECK(std::filesystem::exists(dir / "cache" / "synth_0005_real.mvs"));
  CHECK(run({"augment-preview", "--frame", ds + "/clips/0000/frames/000001.ppm", "--input-res", "32", "--count", "2",
             "--out", (dir / "prev").string()})
            .code == 0);
  CHECK(std::filesystem::exists(dir / "prev" / "aug_01_rgb.ppm"));
  CHECK(run({"eval", "--manifest", ds + "/manifest.jsonl", "--checkpoint", (dir / "none.bin").string()}).code ==
        cli::kExitData);
}
