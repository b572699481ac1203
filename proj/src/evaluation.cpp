#include "lulc/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "lulc/error.hpp"
#include "lulc/io.hpp"

namespace lulc {

TransitionMatrix TransitionMatrix::between(const LulcGrid& before, const LulcGrid& after) {
  if (before.width() != after.width() || before.height() != after.height()) {
    fail(ErrorKind::kShapeMismatch, "transition matrix needs same-shaped grids");
  }
  TransitionMatrix m;
  for (std::size_t i = 0; i < before.size(); ++i) {
    ++m.counts[index_of(before.at(i))][index_of(after.at(i))];
  }
  return m;
}

std::int64_t TransitionMatrix::row_total(LulcClass from) const {
  const auto& row = counts[index_of(from)];
  return std::accumulate(row.begin(), row.end(), std::int64_t{0});
}

std::int64_t TransitionMatrix::grand_total() const {
  std::int64_t n = 0;
  for (const auto c : kAllClasses) n += row_total(c);
  return n;
}

bool TransitionMatrix::row_is_diagonal(LulcClass from) const {
  const auto k = index_of(from);
  for (std::size_t j = 0; j < kNumClasses; ++j) {
    if (j != k && counts[k][j] != 0) return false;
  }
  return true;
}

GreedyResult run_greedy(const LulcGrid& grid, const EnvConfig& env_cfg,
                        const CoefficientTable& table, const Params& policy,
                        int steps) {
  if (steps < 0) fail(ErrorKind::kInvalidArgument, "greedy steps must be >= 0");
  if (steps == 0) {
    return {grid, TransitionMatrix::between(grid, grid), compute_runoff(grid, table)};
  }
  auto cfg = env_cfg;
  cfg.steps_per_episode = steps;
  LulcEnvironment env(grid, cfg, table);
  auto obs = env.observation();
  for (int t = 0; t < steps; ++t) {
    const auto dist = policy_distribution(policy, obs, env.action_mask());
    obs = env.step(dist.mode()).observation;
  }
  const auto& final_grid = env.state().grid;
  return {final_grid, TransitionMatrix::between(grid, final_grid),
          compute_runoff(final_grid, table)};
}

ComparisonReport compare_all(const LulcGrid& grid, const std::vector<Scenario>& scenarios,
                             const Params& policy, const EnvConfig& env_cfg,
                             const CoefficientTable& table) {
  ComparisonReport r;
  r.existing = compute_runoff(grid, table).total_m3_per_s;
  r.entries.push_back({"existing", r.existing});
  double best_other = r.existing;
  for (const auto& s : scenarios) {
    const double q = scenario_runoff(grid, s, table).total_m3_per_s;
    r.entries.push_back({s.name(), q});
    best_other = std::min(best_other, q);
  }
  r.optimized =
      run_greedy(grid, env_cfg, table, policy, static_cast<int>(grid.size())).runoff.total_m3_per_s;
  r.entries.push_back({"optimized", r.optimized});
  r.optimized_below_existing = r.optimized < r.existing;
  r.optimized_is_strict_minimum = r.optimized < best_other;
  return r;
}

std::string format_comparison_csv(const ComparisonReport& report) {
  std::string out = "label,runoff_m3_per_s\n";
  for (const auto& e : report.entries) {
    out += e.label + "," + format_double(e.runoff_m3_per_s) + "\n";
  }
  return out;
}

std::string format_transition_csv(const TransitionMatrix& m) {
  std::string out = "from";
  for (const auto name : kClassNames) out += "," + std::string(name);
  out += ",total\n";
  for (const auto from : kAllClasses) {
    out += std::string(class_name(from));
    for (const auto n : m.counts[index_of(from)]) out += "," + std::to_string(n);
    out += "," + std::to_string(m.row_total(from)) + "\n";
  }
  return out;
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_comparison_svg(const ComparisonReport& report) {
  constexpr double kWidth = 640, kHeight = 360, kLeft = 60, kBottom = 40, kTop = 20;
  const double plot_h = kHeight - kBottom - kTop;
  double top = 0.0;
  for (const auto& e : report.entries) top = std::max(top, e.runoff_m3_per_s);
  if (top <= 0.0) top = 1.0;
  const double slot = (kWidth - kLeft - 10) / static_cast<double>(report.entries.size());

  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto value = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
      "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
      num(kHeight) + "\">\n"
      "  <text x=\"" + num(kLeft) + "\" y=\"14\" font-family=\"sans-serif\" "
      "font-size=\"12\">Peak runoff (m3/s)</text>\n"
      "  <line x1=\"" + num(kLeft) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" +
      num(kWidth - 10) + "\" y2=\"" + num(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const auto& e = report.entries[i];
    const double h = plot_h * std::max(0.0, e.runoff_m3_per_s) / top;
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
    const double y = kHeight - kBottom - h;
    const char* fill = e.label == "optimized" ? "#2a9d8f" : e.label == "existing" ? "#6c757d" : "#e9c46a";
    out += "  <rect class=\"bar\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
           num(slot * 0.7) + "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"/>\n";
    out += "  <text x=\"" + num(x + slot * 0.35) + "\" y=\"" + num(kHeight - kBottom + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           xml_escape(e.label) + "</text>\n";
    out += "  <text x=\"" + num(x + slot * 0.35) + "\" y=\"" + num(y - 4) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
           value(e.runoff_m3_per_s) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

void emit_reports(const ComparisonReport& report, const TransitionMatrix& m,
                  const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + out_dir.string());
  write_file_atomic(out_dir / "comparison.csv", format_comparison_csv(report));
  write_file_atomic(out_dir / "transition.csv", format_transition_csv(m));
  write_file_atomic(out_dir / "comparison.svg", format_comparison_svg(report));
}

}  // namespace lulc
