#include <doctest.h>

#include <cmath>

#include "lulc/environment.hpp"
#include "lulc/error.hpp"
#include "lulc/ppo.hpp"
#include "lulc/seed_grid.hpp"
#include "oracles.hpp"

using namespace lulc;
using C = LulcClass;

namespace {

int code(C c) { return static_cast<int>(c); }

// Advance the cursor with no-op actions until it sits on a pixel of class `c`
// with the requested frozen state.
void seek(LulcEnvironment& env, C c, bool frozen) {
  for (std::size_t guard = 0; guard < env.base().size(); ++guard) {
    const auto i = env.state().cursor;
    if (env.state().grid.at(i) == c && env.state().grid.frozen(i) == frozen) return;
    env.step(code(env.state().grid.at(i)));
  }
  FAIL("no matching pixel");
}

}  // namespace

TEST_CASE("reset") {
  const auto grid = make_seed_grid();
  LulcEnvironment env(grid, EnvConfig{}, default_coefficients());
  const auto obs = env.reset();
  CHECK(obs[code(grid.at(0))] == 1.0);
  CHECK(obs.head<7>().sum() == 1.0);
  CHECK(obs[kObservationSize - 1] == 0.0);
  CHECK(obs[7 + code(C::kAgriculture)] == doctest::Approx(0.718).epsilon(1e-15));
  CHECK(obs.segment<7>(7).sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(env.state().baseline_runoff_m3_per_s ==
        compute_runoff(grid, default_coefficients()).total_m3_per_s);
  CHECK(env.state().cursor == 0);
  CHECK(env.state().step == 0);
  CHECK(env.state().steps_per_episode == 1000);
}

TEST_CASE("step rewards") {
  const auto table = default_coefficients();
  EnvConfig cfg;
  cfg.reward_scale = 1.0;
  LulcEnvironment env(make_seed_grid(), cfg, table);

  SUBCASE("agriculture to wetland") {
    seek(env, C::kAgriculture, false);
    const auto i = env.state().cursor;
    const auto r = env.step(code(C::kWetland));
    CHECK(r.reward == doctest::Approx(8.75e-4).epsilon(1e-12));
    CHECK(env.state().grid.at(i) == C::kWetland);
  }
  SUBCASE("frozen urban pixel is unaltered") {
    seek(env, C::kUrban, true);
    const auto i = env.state().cursor;
    const auto before = env.state().grid;
    const auto r = env.step(code(C::kWetland));
    CHECK(r.reward == 0.0);
    CHECK(env.state().grid.at(i) == C::kUrban);
    CHECK(env.state().grid == before);
  }
  SUBCASE("no-op action") {
    seek(env, C::kForest, false);
    const auto before = env.state().grid;
    const auto r = env.step(code(C::kForest));
    CHECK(r.reward == 0.0);
    CHECK(env.state().grid == before);
  }
  SUBCASE("invalid action") {
    CHECK_THROWS_AS(env.step(7), Error);
  }
}

TEST_CASE("episode termination") {
  EnvConfig cfg;
  cfg.steps_per_episode = 3;
  LulcEnvironment env(make_seed_grid(), cfg, default_coefficients());
  CHECK_FALSE(env.step(0).done);
  CHECK_FALSE(env.step(0).done);
  const auto last = env.step(0);
  CHECK(last.done);
  CHECK(last.observation[kObservationSize - 1] == 1.0);
  try {
    env.step(0);
    FAIL("expected EpisodeFinished");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kEpisodeFinished);
  }
  env.reset();
  CHECK_NOTHROW(env.step(0));
}

TEST_CASE("cursor wraps when the episode is longer than the grid") {
  const LulcGrid g(2, 1, {C::kForest, C::kGrassland}, 100.0);
  EnvConfig cfg;
  cfg.steps_per_episode = 5;
  LulcEnvironment env(g, cfg, default_coefficients());
  for (int t = 0; t < 4; ++t) env.step(code(C::kWetland));
  CHECK(env.state().cursor == 0);
  CHECK(env.state().grid.at(0) == C::kWetland);
}

TEST_CASE("target bonus is paid once on crossing") {
  const LulcGrid g(3, 1, {C::kAgriculture, C::kAgriculture, C::kAgriculture}, 3600.0);
  EnvConfig cfg;
  cfg.reward_scale = 1.0;
  cfg.target_bonus = 5.0;
  cfg.target_reduction_m3_per_s = 0.005;  // each conversion reduces 0.0035
  LulcEnvironment env(g, cfg, default_coefficients());
  const double r0 = env.step(code(C::kWetland)).reward;
  const double r1 = env.step(code(C::kWetland)).reward;
  const double r2 = env.step(code(C::kWetland)).reward;
  CHECK(r0 == doctest::Approx(0.0035));
  CHECK(r1 == doctest::Approx(5.0035));
  CHECK(r2 == doctest::Approx(0.0035));
}

TEST_CASE("action mask") {
  LulcEnvironment env(make_seed_grid(), EnvConfig{}, default_coefficients());
  seek(env, C::kWetland, true);
  auto m = env.action_mask();
  for (int a = 0; a < kNumActions; ++a) CHECK(m[a] == (a == code(C::kWetland)));
  seek(env, C::kForest, false);
  m = env.action_mask();
  for (int a = 0; a < kNumActions; ++a) CHECK(m[a]);
}

TEST_CASE("water can be frozen by configuration") {
  EnvConfig cfg;
  cfg.frozen_classes.push_back(C::kWater);
  LulcEnvironment env(make_seed_grid(), cfg, default_coefficients());
  CHECK(env.base().frozen_count() == 110);
}

TEST_CASE("random policy properties") {
  const auto grid = make_seed_grid();
  const auto table = default_coefficients();
  LulcEnvironment env(grid, EnvConfig{}, table);
  Xoshiro256 rng(42);
  double reward_sum = 0.0;
  int episodes = 0;
  for (int t = 0; t < 20000; ++t) {
    const auto r = env.step(static_cast<int>(rng.below(kNumActions)));
    reward_sum += r.reward;
    const auto& s = env.state();
    // incremental runoff tracks the full recomputation
    const double full = compute_runoff(s.grid, table).total_m3_per_s;
    REQUIRE(std::abs(s.current_runoff_m3_per_s() - full) <= 1e-12 * full);
    if (r.done) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.frozen(i)) REQUIRE(s.grid.at(i) == grid.at(i));
      }
      REQUIRE(std::abs(reward_sum / env.config().reward_scale -
                       (s.baseline_runoff_m3_per_s - full)) < 1e-9);
      reward_sum = 0.0;
      ++episodes;
      env.reset();
    }
  }
  CHECK(episodes == 20);
}
