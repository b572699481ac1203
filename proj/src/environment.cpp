#include "lulc/environment.hpp"

#include <cmath>
#include <string>

#include "lulc/error.hpp"

namespace lulc {

void EnvConfig::validate() const {
  if (steps_per_episode < 0) {
    fail(ErrorKind::kInvalidArgument, "steps_per_episode must be >= 1 (0 = pixel count)");
  }
  if (!(reward_scale > 0.0)) fail(ErrorKind::kInvalidArgument, "reward_scale must be > 0");
  if (!(target_reduction_m3_per_s >= 0.0)) {
    fail(ErrorKind::kInvalidArgument, "target_reduction_m3_per_s must be >= 0");
  }
  if (!(target_bonus >= 0.0)) fail(ErrorKind::kInvalidArgument, "target_bonus must be >= 0");
}

LulcEnvironment::LulcEnvironment(LulcGrid base, EnvConfig cfg,
                                 CoefficientTable table)
    : base_(base.with_frozen_classes(cfg.frozen_classes)),
      cfg_(std::move(cfg)),
      table_(table),
      state_{.grid = base_} {
  cfg_.validate();
  if (base_.size() == 0) fail(ErrorKind::kEmptyGrid, "environment grid is empty");
  reset();
}

Observation LulcEnvironment::reset() {
  state_.grid = base_;
  state_.histogram = class_histogram(base_);
  state_.cursor = 0;
  state_.step = 0;
  state_.steps_per_episode = cfg_.steps_per_episode > 0
                                 ? cfg_.steps_per_episode
                                 : static_cast<int>(base_.size());
  state_.baseline_runoff_m3_per_s =
      runoff_from_histogram(state_.histogram, base_.cell_area_m2(), table_)
          .total_m3_per_s;
  state_.cumulative_reduction_m3_per_s = 0.0;
  state_.bonus_awarded = false;
  return observation();
}

StepResult LulcEnvironment::step(int action) {
  if (state_.done()) {
    fail(ErrorKind::kEpisodeFinished, "step called after the episode finished");
  }
  const auto target = class_from_code(action);
  if (!target) {
    fail(ErrorKind::kInvalidArgument, "action out of range: " + std::to_string(action));
  }

  StepResult out;
  const auto i = state_.cursor;
  const auto current = state_.grid.at(i);
  if (!state_.grid.frozen(i) && *target != current) {
    const double delta =
        rational_runoff(table_[current] - table_[*target],
                        table_.intensity_mm_per_hr, base_.cell_area_m2());
    state_.grid.set_class(i, *target);
    --state_.histogram[current];
    ++state_.histogram[*target];
    const double before = state_.cumulative_reduction_m3_per_s;
    state_.cumulative_reduction_m3_per_s += delta;
    out.reward = delta * cfg_.reward_scale;
    if (!state_.bonus_awarded && before < cfg_.target_reduction_m3_per_s &&
        state_.cumulative_reduction_m3_per_s >= cfg_.target_reduction_m3_per_s) {
      state_.bonus_awarded = true;
      out.reward += cfg_.target_bonus;
    }
  }

  state_.cursor = (i + 1) % base_.size();
  ++state_.step;
  out.done = state_.done();
  out.observation = observation();
  return out;
}

ActionMask LulcEnvironment::action_mask() const {
  ActionMask mask;
  const auto i = state_.cursor;
  if (state_.grid.frozen(i)) {
    mask.fill(false);
    mask[index_of(state_.grid.at(i))] = true;
  } else {
    mask.fill(true);
  }
  return mask;
}

Observation LulcEnvironment::observation() const {
  Observation obs = Observation::Zero();
  obs[static_cast<int>(index_of(state_.grid.at(state_.cursor)))] = 1.0;
  const double n = static_cast<double>(state_.grid.size());
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    obs[static_cast<int>(kNumClasses + k)] =
        static_cast<double>(state_.histogram.counts[k]) / n;
  }
  obs[kObservationSize - 1] =
      static_cast<double>(state_.step) / static_cast<double>(state_.steps_per_episode);
  return obs;
}

}  // namespace lulc
