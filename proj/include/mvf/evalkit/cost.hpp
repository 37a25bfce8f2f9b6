#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <string>
#include <vector>

namespace mvf::evalkit {

// Operations per 4x4 cell: 4 MV channels x (1 scale + 1 standardization op)
// plus 2 IM channels x 1 assignment.
inline constexpr double kOpsPerCell = 10.0;

struct CostReport {
  int width = 0;
  int height = 0;
  double ops = 0;  // W*H/16*kOpsPerCell, exact
  double mflop_mv = 0;  // ops / 1e6
  std::optional<double> mflop_flow_reference;  // published RAFT cost, when known
};

// cost = (W/4) * (H/4) * kOpsPerCell, in MFLOP; exact in W*H.
CostReport flop_cost(int width, int height);

// One line describing the counting convention, printed with every report.
std::string cost_convention();

// Markdown table: Resolution | OF MFLOP | MV MFLOP, MV with one decimal.
std::string render_cost_table(const std::vector<CostReport>& reports);
// CSV header: width,height,mflop_mv,mflop_of_reference
std::string cost_csv(const std::vector<CostReport>& reports);

// Parses "WxH" (also accepts the multiplication sign).
std::pair<int, int> parse_resolution(std::string_view text);

}  // namespace mvf::evalkit
