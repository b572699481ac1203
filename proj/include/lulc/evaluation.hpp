#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "lulc/environment.hpp"
#include "lulc/ppo.hpp"
#include "lulc/scenario.hpp"

namespace lulc {

// counts[from][to] over pixels of two same-shaped grids.
struct TransitionMatrix {
  std::array<PerClass<std::int64_t>, kNumClasses> counts{};

  static TransitionMatrix between(const LulcGrid& before, const LulcGrid& after);

  std::int64_t row_total(LulcClass from) const;
  std::int64_t grand_total() const;
  bool row_is_diagonal(LulcClass from) const;
};

struct GreedyResult {
  LulcGrid final_grid;
  TransitionMatrix transitions;
  RunoffResult runoff;
};

// Applies the masked argmax action for `steps` cursor steps, starting from a
// fresh episode on `grid`. steps = 0 leaves the grid untouched.
GreedyResult run_greedy(const LulcGrid& grid, const EnvConfig& env_cfg,
                        const CoefficientTable& table, const Params& policy,
                        int steps);

struct ComparisonEntry {
  std::string label;
  double runoff_m3_per_s;
};

struct ComparisonReport {
  // existing, one entry per scenario in input order, optimized
  std::vector<ComparisonEntry> entries;
  double existing = 0.0;
  double optimized = 0.0;
  bool optimized_below_existing = false;
  bool optimized_is_strict_minimum = false;
};

// Existing, per-scenario and optimized runoff; the optimized value comes from
// a greedy sweep of one step per pixel.
ComparisonReport compare_all(const LulcGrid& grid, const std::vector<Scenario>& scenarios,
                             const Params& policy, const EnvConfig& env_cfg,
                             const CoefficientTable& table);

// `label,runoff_m3_per_s`
std::string format_comparison_csv(const ComparisonReport& report);
// `from,water,...,wetland,total`
std::string format_transition_csv(const TransitionMatrix& m);
// Static bar chart, one <rect class="bar"> per entry.
std::string format_comparison_svg(const ComparisonReport& report);

// Writes comparison.csv, transition.csv and comparison.svg into `out_dir`.
void emit_reports(const ComparisonReport& report, const TransitionMatrix& m,
                  const std::filesystem::path& out_dir);

}  // namespace lulc
