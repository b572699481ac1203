#include "lulc/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "lulc/error.hpp"
#include "lulc/io.hpp"

namespace lulc {

Scenario::Scenario(std::string name, PerClass<std::optional<double>> change)
    : name_(std::move(name)), change_(change) {
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (change_[k] && !(*change_[k] > -1.0 && std::isfinite(*change_[k]))) {
      fail(ErrorKind::kInvalidArgument,
           "scenario " + name_ + ": change for " + std::string(kClassNames[k]) +
               " must be a finite fraction > -1");
    }
  }
}

Scenario Scenario::identity(std::string name) {
  return Scenario(std::move(name), {});
}

std::vector<Scenario> builtin_scenarios() {
  using C = LulcClass;
  auto make = [](std::string name,
                 std::initializer_list<std::pair<C, double>> deltas) {
    PerClass<std::optional<double>> change{};
    for (const auto& [c, p] : deltas) change[index_of(c)] = p;
    return Scenario(std::move(name), change);
  };
  return {
      make("s1", {{C::kBarren, -0.50},
                  {C::kAgriculture, -0.10},
                  {C::kGrassland, 0.50},
                  {C::kWetland, 0.10}}),
      make("s2", {{C::kAgriculture, 0.10},
                  {C::kGrassland, -0.50},
                  {C::kForest, -0.10}}),
      make("s3", {{C::kBarren, 0.50},
                  {C::kAgriculture, 0.15},
                  {C::kGrassland, -0.20}}),
      make("s4", {{C::kBarren, -0.50},
                  {C::kAgriculture, 0.20},
                  {C::kGrassland, -0.875},
                  {C::kForest, -0.50},
                  {C::kWetland, -0.50}}),
      make("s5", {{C::kBarren, -0.50},
                  {C::kAgriculture, -0.20},
                  {C::kGrassland, 0.75},
                  {C::kForest, 1.00},
                  {C::kWetland, 1.00}}),
  };
}

std::optional<Scenario> builtin_scenario(std::string_view id) {
  for (auto& s : builtin_scenarios()) {
    if (s.name() == id) return s;
  }
  return std::nullopt;
}

ReallocationReport apply_scenario(const ClassHistogram& hist, const Scenario& s) {
  const auto total = hist.total();
  if (total <= 0) fail(ErrorKind::kEmptyGrid, "scenario applied to empty histogram");

  ReallocationReport report;
  report.before = hist;
  std::vector<std::pair<double, std::size_t>> recipients;
  std::int64_t target_sum = 0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const auto count = hist.counts[k];
    std::int64_t t = count;
    if (const auto& p = s.changes()[k]) {
      t = static_cast<std::int64_t>(std::round(static_cast<double>(count) * (1.0 + *p)));
      recipients.emplace_back(static_cast<double>(count) * *p, k);
    }
    if (t < 0) {
      fail(ErrorKind::kInfeasibleScenario,
           "scenario " + s.name() + ": negative target for " +
               std::string(kClassNames[k]));
    }
    report.targets.counts[k] = t;
    target_sum += t;
  }
  report.after = report.targets;
  report.residual = total - target_sum;
  if (report.residual == 0) return report;

  std::stable_sort(recipients.begin(), recipients.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [requested, k] : recipients) {
    if (report.targets.counts[k] + report.residual >= 0) {
      report.after.counts[k] += report.residual;
      report.residual_assigned_to = kAllClasses[k];
      return report;
    }
  }
  fail(ErrorKind::kInfeasibleScenario,
       "scenario " + s.name() + ": residual " + std::to_string(report.residual) +
           " would drive " + std::string(kClassNames[recipients.front().second]) +
           " negative and no other changed class can absorb it");
}

RunoffResult scenario_runoff(const LulcGrid& grid, const Scenario& s,
                             const CoefficientTable& table) {
  const auto report = apply_scenario(class_histogram(grid), s);
  return runoff_from_histogram(report.after, grid.cell_area_m2(), table);
}

Scenario parse_scenario_csv(std::string name, std::string_view text) {
  PerClass<std::optional<double>> change{};
  PerClass<bool> seen{};
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line == "class_name,delta") continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      fail(ErrorKind::kInvalidArgument,
           "scenario: expected class_name,delta in '" + std::string(line) + "'");
    }
    const auto cls = class_from_name(trim(line.substr(0, comma)));
    if (!cls) {
      fail(ErrorKind::kInvalidArgument,
           "scenario: unknown class in '" + std::string(line) + "'");
    }
    if (seen[index_of(*cls)]) {
      fail(ErrorKind::kInvalidArgument,
           "scenario: duplicate class in '" + std::string(line) + "'");
    }
    seen[index_of(*cls)] = true;
    const auto delta = trim(line.substr(comma + 1));
    if (delta != "nc") change[index_of(*cls)] = parse_double(delta);
  }
  return Scenario(std::move(name), change);
}

Scenario read_scenario_csv(const std::filesystem::path& path) {
  return parse_scenario_csv(path.stem().string(), read_text_file(path));
}

}  // namespace lulc
