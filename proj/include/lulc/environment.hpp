#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <vector>

#include "lulc/grid.hpp"
#include "lulc/runoff.hpp"

namespace lulc {

inline constexpr int kObservationSize = 15;
inline constexpr int kNumActions = static_cast<int>(kNumClasses);

// one-hot class of the cursor pixel (7) ++ class fractions (7) ++ progress (1)
using Observation = Eigen::Matrix<double, kObservationSize, 1>;
using ActionMask = std::array<bool, kNumClasses>;

struct EnvConfig {
  int steps_per_episode = 0;  // 0 resolves to the pixel count
  double target_reduction_m3_per_s = 0.0;
  double target_bonus = 0.0;
  double reward_scale = 1e3;
  std::vector<LulcClass> frozen_classes = {LulcClass::kUrban, LulcClass::kWetland};

  void validate() const;
};

struct EnvState {
  LulcGrid grid;
  ClassHistogram histogram;
  std::size_t cursor = 0;
  int step = 0;
  int steps_per_episode = 0;
  double baseline_runoff_m3_per_s = 0.0;
  double cumulative_reduction_m3_per_s = 0.0;
  bool bonus_awarded = false;

  bool done() const { return step >= steps_per_episode; }
  double current_runoff_m3_per_s() const {
    return baseline_runoff_m3_per_s - cumulative_reduction_m3_per_s;
  }
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
};

// Cursor-sweep land-use MDP. Each step rewrites the pixel under the cursor to
// the chosen class (unless it is frozen) and rewards the resulting runoff
// reduction; the cursor advances row-major and wraps.
class LulcEnvironment {
 public:
  LulcEnvironment(LulcGrid base, EnvConfig cfg, CoefficientTable table);

  Observation reset();
  StepResult step(int action);

  ActionMask action_mask() const;
  Observation observation() const;

  const EnvState& state() const { return state_; }
  const EnvConfig& config() const { return cfg_; }
  const CoefficientTable& table() const { return table_; }
  // Base grid with frozen classes folded into its mask.
  const LulcGrid& base() const { return base_; }

 private:
  LulcGrid base_;
  EnvConfig cfg_;
  CoefficientTable table_;
  EnvState state_;
};

}  // namespace lulc
