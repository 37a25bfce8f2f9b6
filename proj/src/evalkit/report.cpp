#include "mvf/evalkit/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include "mvf/error.hpp"
#include "mvf/ingest/fileio.hpp"
#include "mvf/parallel.hpp"

namespace mvf::evalkit {

double EvalMatrix::at(std::string_view row, std::string_view col) const {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] != row) continue;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (cols[c] == col) return cells[r][c];
    }
  }
  throw FormatError("no cell (" + std::string(row) + ", " + std::string(col) + ")");
}

void EvalMatrix::validate() const {
  if (cells.size() != rows.size() || row_sizes.size() != rows.size()) throw FormatError("matrix row count mismatch");
  for (const auto& row : cells) {
    if (row.size() != cols.size()) throw FormatError("matrix column count mismatch");
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) throw FormatError("accuracy outside [0, 1]");
    }
  }
  for (int s : row_sizes) {
    if (s < 0) throw FormatError("negative set size");
  }
}

bool EvalMatrix::all_row_consistent() const {
  std::size_t all = rows.size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] == kAllSet) all = r;
  }
  if (all == rows.size()) return true;
  long total = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r == all) continue;
    if (row_sizes[r] <= 0) return true;
    total += row_sizes[r];
  }
  for (std::size_t c = 0; c < cols.size(); ++c) {
    double weighted = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != all) weighted += cells[r][c] * row_sizes[r];
    }
    if (std::abs(weighted / static_cast<double>(total) - cells[all][c]) > 1e-9) return false;
  }
  return true;
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string serialize_eval_csv(const EvalMatrix& m) {
  m.validate();
  std::string out = m.corner + ",size";
  for (const std::string& c : m.cols) out += "," + c;
  out += "\n";
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    out += m.rows[r] + "," + std::to_string(m.row_sizes[r]);
    for (double v : m.cells[r]) out += "," + shortest(v);
    out += "\n";
  }
  return out;
}

EvalMatrix parse_eval_csv(std::string_view text) {
  EvalMatrix m;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line_no == 1) {
      if (fields.size() < 3 || fields[1] != "size") throw FormatError(where + "header must be <corner>,size,<columns>");
      m.corner = fields[0];
      m.cols.assign(fields.begin() + 2, fields.end());
      continue;
    }
    if (fields.size() != m.cols.size() + 2) throw FormatError(where + "expected " + std::to_string(m.cols.size() + 2) + " fields");
    m.rows.push_back(fields[0]);
    int size = 0;
    auto rs = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), size);
    if (rs.ec != std::errc{} || rs.ptr != fields[1].data() + fields[1].size()) throw FormatError(where + "bad set size");
    m.row_sizes.push_back(size);
    std::vector<double> row;
    for (std::size_t c = 2; c < fields.size(); ++c) {
      double v = 0;
      auto rv = std::from_chars(fields[c].data(), fields[c].data() + fields[c].size(), v);
      if (rv.ec != std::errc{} || rv.ptr != fields[c].data() + fields[c].size()) throw FormatError(where + "bad accuracy \"" + fields[c] + "\"");
      row.push_back(v);
    }
    m.cells.push_back(std::move(row));
  }
  if (line_no == 0) throw FormatError("empty matrix file");
  m.validate();
  return m;
}

EvalMatrix read_eval_csv(const std::filesystem::path& path) { return parse_eval_csv(ingest::read_file_text(path)); }

std::string render_eval_markdown(const EvalMatrix& m) {
  m.validate();
  std::string out = "| " + m.corner + " |";
  for (const std::string& c : m.cols) out += " " + c + " |";
  out += "\n| :--- |";
  for (std::size_t c = 0; c < m.cols.size(); ++c) out += " :---: |";
  out += "\n";
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    out += "| " + m.rows[r] + " |";
    for (double v : m.cells[r]) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.2f%%", v * 100.0);
      out += std::string(" ") + buf + " |";
    }
    out += "\n";
  }
  return out;
}

EvalMatrix published_mvim_matrix() {
  EvalMatrix m;
  m.corner = "MV+IM";
  m.cols = {"DeepFakes", "Face2Face", "FaceShifter", "FaceSwap", "NeuralTextures", "all"};
  m.rows = {"DeepFakes", "Face2Face", "FaceShifter", "FaceSwap", "NeuralTextures", "Pristine", "all"};
  m.cells = {
      {0.8353, 0.3577, 0.6723, 0.3647, 0.4873, 0.7757},
      {0.2557, 0.7650, 0.3823, 0.2220, 0.6460, 0.6393},
      {0.3610, 0.3040, 0.7530, 0.2383, 0.4787, 0.5900},
      {0.2897, 0.2257, 0.3490, 0.8117, 0.2720, 0.6400},
      {0.2343, 0.4363, 0.3907, 0.1623, 0.7423, 0.5047},
      {0.8610, 0.7893, 0.7563, 0.8317, 0.6963, 0.7603},
      {0.4010, 0.4210, 0.5143, 0.3553, 0.5170, 0.6303},
  };
  m.row_sizes.assign(m.rows.size(), 0);
  return m;
}

EvalMatrix cross_forgery_matrix(const std::vector<std::pair<std::string, VideoPredictor>>& predictors,
                                const std::vector<net::Video>& test_videos, const std::string& corner) {
  std::vector<std::vector<std::size_t>> groups;
  EvalMatrix m;
  m.corner = corner;
  for (ingest::ForgeryType t : ingest::kForgeryTypes) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < test_videos.size(); ++i) {
      if (test_videos[i].label == ingest::Label::kFake && test_videos[i].forgery == t) idx.push_back(i);
    }
    if (idx.empty()) continue;
    m.rows.emplace_back(ingest::forgery_name(t));
    groups.push_back(std::move(idx));
  }
  if (groups.empty()) throw EmptySplit("test split has no fake videos");
  std::vector<std::size_t> reals;
  for (std::size_t i = 0; i < test_videos.size(); ++i) {
    if (test_videos[i].label == ingest::Label::kReal) reals.push_back(i);
  }
  if (reals.empty()) throw EmptySplit("test split has no real videos");
  m.rows.emplace_back(ingest::forgery_name(ingest::ForgeryType::kPristine));
  groups.push_back(std::move(reals));
  m.rows.emplace_back(kAllSet);
  for (const auto& g : groups) m.row_sizes.push_back(static_cast<int>(g.size()));
  m.row_sizes.push_back(static_cast<int>(test_videos.size()));

  m.cells.assign(m.rows.size(), std::vector<double>(predictors.size(), 0.0));
  for (std::size_t c = 0; c < predictors.size(); ++c) {
    m.cols.push_back(predictors[c].first);
    std::vector<uint8_t> correct(test_videos.size(), 0);
    for (std::size_t i = 0; i < test_videos.size(); ++i) {
      const bool fake = net::is_fake_prediction(predictors[c].second(test_videos[i]));
      correct[i] = fake == (test_videos[i].label == ingest::Label::kFake) ? 1 : 0;
    }
    std::size_t total = 0;
    for (std::size_t r = 0; r < groups.size(); ++r) {
      std::size_t hits = 0;
      for (std::size_t i : groups[r]) hits += correct[i];
      total += hits;
      m.cells[r][c] = static_cast<double>(hits) / static_cast<double>(groups[r].size());
    }
    m.cells.back()[c] = static_cast<double>(total) / static_cast<double>(test_videos.size());
  }
  return m;
}

EvalMatrix cross_forgery_eval(const std::vector<TrainedCondition>& conditions, const ingest::DatasetManifest& manifest,
                              int k, uint64_t seed, const std::string& corner, int threads) {
  if (conditions.empty()) throw MissingCheckpoint("no checkpoints given");
  const auto entries = manifest.select(ingest::Split::kTest);
  if (entries.empty()) throw EmptySplit("manifest has no test videos");
  // All conditions must share the input format so videos load once.
  const net::Architecture& arch = conditions.front().checkpoint.arch;
  for (const TrainedCondition& c : conditions) {
    if (c.checkpoint.arch.modality != arch.modality) throw ShapeMismatch("checkpoints use different input modalities");
  }
  const std::vector<net::Video> videos = net::load_videos(entries, arch);
  std::vector<std::pair<std::string, VideoPredictor>> predictors;
  for (const TrainedCondition& c : conditions) {
    // Models cache activations, so each worker gets its own copy.
    std::vector<std::unique_ptr<net::Model<float>>> models(static_cast<std::size_t>(std::max(1, threads)));
    auto probs = std::make_shared<std::vector<double>>(videos.size());
    parallel_for(videos.size(), threads, [&](int worker, std::size_t i) {
      auto& model = models[static_cast<std::size_t>(worker)];
      if (!model) model = net::load_model<float>(c.checkpoint);
      (*probs)[i] = net::predict_video(*model, c.checkpoint.arch, videos[i], k, derive_seed(seed, i));
    });
    predictors.emplace_back(c.name, [probs, &videos](const net::Video& v) {
      return (*probs)[static_cast<std::size_t>(&v - videos.data())];
    });
  }
  return cross_forgery_matrix(predictors, videos, corner);
}

}  // namespace mvf::evalkit
