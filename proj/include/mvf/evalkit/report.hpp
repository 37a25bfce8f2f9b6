#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mvf/ingest/sidecars.hpp"
#include "mvf/net/model.hpp"
#include "mvf/net/train.hpp"

namespace mvf::evalkit {

inline constexpr std::string_view kAllSet = "all";

// Accuracy matrix: rows are evaluated sets, columns are training sets.
struct EvalMatrix {
  std::string corner;  // label of the top-left cell, e.g. the input modality
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<std::vector<double>> cells;  // [row][col], accuracy in [0, 1]
  std::vector<int> row_sizes;              // videos per evaluated set; 0 = unknown

  double at(std::string_view row, std::string_view col) const;
  // Checks shape and that every cell lies in [0, 1]; FormatError otherwise.
  void validate() const;
  // When an "all" row is present and every other row has a known size, the
  // "all" row must be their size-weighted mean (to 1e-9).
  bool all_row_consistent() const;
  bool operator==(const EvalMatrix&) const = default;
};

// CSV: header "<corner>,size,<col>,..." then one line per row with the set
// name, its size and accuracies.
std::string serialize_eval_csv(const EvalMatrix& m);
EvalMatrix parse_eval_csv(std::string_view text);
EvalMatrix read_eval_csv(const std::filesystem::path& path);

// Markdown table in the published layout: corner label, training sets as
// columns, evaluated sets as rows, cells as percentages with two decimals.
std::string render_eval_markdown(const EvalMatrix& m);

// Published MV+IM cross-forgery matrix, "all" row and column included.
EvalMatrix published_mvim_matrix();

// Video-level probabilities for one trained condition.
using VideoPredictor = std::function<double(const net::Video&)>;

struct TrainedCondition {
  std::string name;  // column label: a forgery type name or "all"
  net::Checkpoint checkpoint;
};

// Rows: every fake type with test videos, Pristine, then "all". A video counts
// as correct when (p >= 0.5) matches its label. EmptySplit when the test split
// lacks real or fake videos.
EvalMatrix cross_forgery_eval(const std::vector<TrainedCondition>& conditions, const ingest::DatasetManifest& manifest,
                              int k, uint64_t seed, const std::string& corner, int threads = 1);

// Same, with arbitrary predictors; used by the checkpoint variant and tests.
EvalMatrix cross_forgery_matrix(const std::vector<std::pair<std::string, VideoPredictor>>& predictors,
                                const std::vector<net::Video>& test_videos, const std::string& corner);

}  // namespace mvf::evalkit
