#include "mvf/evalkit/cost.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "mvf/error.hpp"

namespace mvf::evalkit {

namespace {

struct PublishedCost {
  int width;
  int height;
  double of_mflop;
  const char* of_text;
};

constexpr PublishedCost kTable3[] = {
    {480, 360, 138.8e3, "138.8 · 10^3"},
    {640, 480, 249.3e3, "249.3 · 10^3"},
    {1280, 720, 783.5e3, "783.5 · 10^3"},
    {1920, 1080, 1.9e6, "1.9 · 10^6"},
};

const PublishedCost* published(int w, int h) {
  for (const PublishedCost& p : kTable3) {
    if (p.width == w && p.height == h) return &p;
  }
  return nullptr;
}

}  // namespace

CostReport flop_cost(int width, int height) {
  if (width <= 0 || height <= 0) throw GeometryError("resolution must be positive");
  CostReport r;
  r.width = width;
  r.height = height;
  r.ops = static_cast<double>(width) * height / 16.0 * kOpsPerCell;
  r.mflop_mv = r.ops / 1e6;
  if (const PublishedCost* p = published(width, height)) r.mflop_flow_reference = p->of_mflop;
  return r;
}

std::string cost_convention() {
  return "MV cost per 4x4 cell: 4 MV channels x (1 scale + 1 standardization op) + 2 IM channels x 1 assignment "
         "= 10 ops; MFLOP = (W/4)*(H/4)*10/1e6. OF column: published RAFT reference, not computed.";
}

std::string render_cost_table(const std::vector<CostReport>& reports) {
  std::ostringstream out;
  out << "| Resolution | OF MFLOP | MV MFLOP |\n";
  out << "| :--- | ---: | :---: |\n";
  for (const CostReport& r : reports) {
    const PublishedCost* p = published(r.width, r.height);
    char mv[32];
    std::snprintf(mv, sizeof(mv), "%.1f", r.mflop_mv);
    out << "| " << r.width << "×" << r.height << " | " << (p != nullptr ? p->of_text : "n/a") << " | " << mv << " |\n";
  }
  return out.str();
}

std::string cost_csv(const std::vector<CostReport>& reports) {
  std::ostringstream out;
  out << "width,height,mflop_mv,mflop_of_reference\n";
  for (const CostReport& r : reports) {
    char mv[32];
    std::snprintf(mv, sizeof(mv), "%.6f", r.mflop_mv);
    out << r.width << ',' << r.height << ',' << mv << ',';
    if (r.mflop_flow_reference) out << *r.mflop_flow_reference;
    out << '\n';
  }
  return out.str();
}

std::pair<int, int> parse_resolution(std::string_view text) {
  std::size_t sep = text.find('x');
  std::size_t sep_len = 1;
  if (sep == std::string_view::npos) {
    sep = text.find("×");
    sep_len = std::string_view("×").size();
  }
  if (sep == std::string_view::npos) throw FormatError("resolution \"" + std::string(text) + "\" is not WxH");
  int w = 0, h = 0;
  const std::string_view a = text.substr(0, sep), b = text.substr(sep + sep_len);
  const auto ra = std::from_chars(a.data(), a.data() + a.size(), w);
  const auto rb = std::from_chars(b.data(), b.data() + b.size(), h);
  if (ra.ec != std::errc{} || ra.ptr != a.data() + a.size() || rb.ec != std::errc{} || rb.ptr != b.data() + b.size() ||
      w <= 0 || h <= 0 || w > 1 << 16 || h > 1 << 16) {
    throw FormatError("resolution \"" + std::string(text) + "\" is not WxH with positive sizes");
  }
  return {w, h};
}

}  // namespace mvf::evalkit
