#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lulc/grid.hpp"
#include "lulc/runoff.hpp"

namespace lulc {

// Per-class relative area changes. std::nullopt means "no change"; a value p
// requests counts * (1 + p) pixels, with p > -1.
class Scenario {
 public:
  Scenario(std::string name, PerClass<std::optional<double>> change);

  static Scenario identity(std::string name = "identity");

  const std::string& name() const { return name_; }
  const std::optional<double>& change(LulcClass c) const {
    return change_[index_of(c)];
  }
  const PerClass<std::optional<double>>& changes() const { return change_; }

 private:
  std::string name_;
  PerClass<std::optional<double>> change_;
};

struct ReallocationReport {
  ClassHistogram before;
  ClassHistogram targets;  // rounded targets before the residual is applied
  ClassHistogram after;
  std::int64_t residual = 0;
  std::optional<LulcClass> residual_assigned_to;
};

// The five built-in management scenarios, named s1..s5.
std::vector<Scenario> builtin_scenarios();
std::optional<Scenario> builtin_scenario(std::string_view id);

// Rounds each changed class to round_half_away(counts * (1 + p)), then gives
// the residual total - sum(targets) to the changed class with the largest
// requested pixel increase (ties by lowest code), falling back down that
// ordering while the recipient would go negative. Throws kInfeasibleScenario.
ReallocationReport apply_scenario(const ClassHistogram& hist, const Scenario& s);

RunoffResult scenario_runoff(const LulcGrid& grid, const Scenario& s,
                             const CoefficientTable& table);

// CSV rows `class_name,delta`, delta a signed fraction or `nc`. Classes not
// listed are unchanged.
Scenario parse_scenario_csv(std::string name, std::string_view text);
Scenario read_scenario_csv(const std::filesystem::path& path);

}  // namespace lulc
