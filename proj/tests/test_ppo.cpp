#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numeric>

#include "lulc/error.hpp"
#include "lulc/ppo.hpp"
#include "lulc/seed_grid.hpp"
#include "oracles.hpp"

using namespace lulc;
using C = LulcClass;

namespace {

// Zero-weight policy whose output bias strongly prefers `c`.
Params biased_policy(C c, double logit = 50.0) {
  auto p = Params::zeros(kPolicySizes);
  p.biases.back()[static_cast<Eigen::Index>(index_of(c))] = logit;
  return p;
}

RolloutBuffer random_buffer(Xoshiro256& rng, std::size_t n) {
  RolloutBuffer b;
  for (std::size_t t = 0; t < n; ++t) {
    b.observations.push_back(Observation::Zero());
    b.masks.push_back({true, true, true, true, true, true, true});
    b.actions.push_back(0);
    b.log_probs.push_back(0.0);
    b.rewards.push_back(4.0 * rng.uniform() - 2.0);
    b.values.push_back(4.0 * rng.uniform() - 2.0);
    b.dones.push_back(rng.below(8) == 0 ? 1 : 0);
  }
  b.bootstrap_value = b.dones.back() ? 0.0 : 4.0 * rng.uniform() - 2.0;
  return b;
}

LulcGrid toy_grid() { return LulcGrid(2, 1, {C::kWetland, C::kAgriculture}, 900.0); }

}  // namespace

TEST_CASE("compute_gae") {
  SUBCASE("all zero") {
    RolloutBuffer b;
    b.rewards = {0, 0, 0};
    b.values = {0, 0, 0};
    b.dones = {0, 0, 0};
    b.actions = {0, 0, 0};
    const auto a = compute_gae(b, 0.99, 0.95);
    CHECK(a.advantages == std::vector<double>{0, 0, 0});
  }
  SUBCASE("hand recursion") {
    RolloutBuffer b;
    b.rewards = {1, 1};
    b.values = {0, 0};
    b.dones = {0, 0};
    b.actions = {0, 0};
    const auto a = compute_gae(b, 1.0, 1.0);
    CHECK(a.advantages == std::vector<double>{2, 1});
    CHECK(a.returns == std::vector<double>{2, 1});
  }
  SUBCASE("lambda 1 equals brute-force discounted suffix sums") {
    Xoshiro256 rng(31);
    for (int trial = 0; trial < 500; ++trial) {
      const auto b = random_buffer(rng, 1 + rng.below(64));
      const double gamma = rng.uniform();
      const auto a = compute_gae(b, gamma, 1.0);
      const auto ref = oracle::brute_force_lambda1(b, gamma);
      for (std::size_t t = 0; t < b.size(); ++t) {
        REQUIRE(std::abs(a.advantages[t] - ref[t]) < 1e-10);
        REQUIRE(a.returns[t] == a.advantages[t] + b.values[t]);
      }
    }
  }
  SUBCASE("done cuts the recursion") {
    RolloutBuffer b;
    b.rewards = {1, 5};
    b.values = {0, 0};
    b.dones = {1, 0};
    b.actions = {0, 0};
    b.bootstrap_value = 10;
    const auto a = compute_gae(b, 1.0, 1.0);
    CHECK(a.advantages[0] == 1.0);
    CHECK(a.advantages[1] == 15.0);
  }
}

TEST_CASE("clipped surrogate") {
  CHECK(clipped_surrogate(1.0, 0.7, 0.2) == 0.7);
  CHECK(clipped_surrogate(1.0, -3.0, 0.2) == -3.0);
  CHECK(clipped_surrogate(1.3, 2.0, 0.2) == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(clipped_surrogate(0.5, -1.0, 0.2) == doctest::Approx(-0.8).epsilon(1e-15));
  Xoshiro256 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double eps = 0.05 + 0.5 * rng.uniform();
    const double ratio = 1.0 - eps + 2.0 * eps * rng.uniform();
    const double adv = 10.0 * rng.uniform() - 5.0;
    REQUIRE(clipped_surrogate(ratio, adv, eps) == ratio * adv);
  }
}

TEST_CASE("collect_rollout") {
  const auto table = default_coefficients();
  SUBCASE("horizon 1") {
    Xoshiro256 rng(1);
    const auto p = Params::zeros(kPolicySizes);
    const auto v = Params::zeros(kValueSizes);
    EnvConfig one;
    one.steps_per_episode = 1;
    LulcEnvironment env1(make_seed_grid(), one, table);
    const auto b1 = collect_rollout(env1, p, v, 1, rng);
    CHECK(b1.size() == 1);
    CHECK(b1.dones[0] == 1);
    CHECK(b1.bootstrap_value == 0.0);
    LulcEnvironment env2(make_seed_grid(), EnvConfig{}, table);
    CHECK(collect_rollout(env2, p, v, 1, rng).dones[0] == 0);
  }
  SUBCASE("uniform random policy leaves frozen pixels alone") {
    Xoshiro256 rng(2);
    const auto base = make_seed_grid();
    LulcEnvironment env(base, EnvConfig{}, table);
    const auto b = collect_rollout(env, Params::zeros(kPolicySizes), Params::zeros(kValueSizes),
                                   999, rng);
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (base.frozen(i)) REQUIRE(env.state().grid.at(i) == base.at(i));
    }
    for (std::size_t t = 0; t < b.size(); ++t) REQUIRE(b.masks[t][b.actions[t]]);
    std::array<int, 7> seen{};
    for (const auto a : b.actions) ++seen[a];
    for (const auto n : seen) CHECK(n > 50);
  }
  SUBCASE("greedy wetland policy earns the full reduction") {
    Xoshiro256 rng(3);
    LulcEnvironment env(make_seed_grid(), EnvConfig{}, table);
    const auto b = collect_rollout(env, biased_policy(C::kWetland), Params::zeros(kValueSizes),
                                   1000, rng);
    const double total = std::accumulate(b.rewards.begin(), b.rewards.end(), 0.0);
    // baseline 4199/4000 minus all-changeable-to-wetland 311/1000
    CHECK(std::abs(total / 1e3 - (1.04975 - 0.311)) < 1e-9);
    REQUIRE(b.episode_final_runoffs.size() == 1);
    CHECK(b.episode_final_runoffs[0] == doctest::Approx(0.311).epsilon(1e-12));
    CHECK(b.dones.back() == 1);
  }
}

TEST_CASE("minibatch loss") {
  Xoshiro256 rng(17);
  auto model = init_actor_critic(rng);
  LulcEnvironment env(make_seed_grid(), EnvConfig{}, default_coefficients());
  auto buf = collect_rollout(env, model.policy, model.value, 64, rng);
  std::vector<double> adv(buf.size()), ret(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    adv[i] = 2.0 * rng.uniform() - 1.0;
    ret[i] = 4.0 * rng.uniform() - 2.0;
  }
  std::vector<std::size_t> idx(buf.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  PpoConfig cfg;

  SUBCASE("ratio one gives the mean advantage") {
    const auto loss = minibatch_loss(model, buf, adv, ret, idx, cfg);
    const double mean_adv = std::accumulate(adv.begin(), adv.end(), 0.0) / adv.size();
    CHECK(loss.policy_loss == doctest::Approx(-mean_adv).epsilon(1e-12));
    CHECK(loss.clipped == 0);
  }
  SUBCASE("gradients match finite differences of the total loss") {
    // spread the old log-probs so both clipped and unclipped samples occur
    for (auto& lp : buf.log_probs) lp += 0.6 * rng.uniform() - 0.3;
    const auto loss = minibatch_loss(model, buf, adv, ret, idx, cfg);
    CHECK(loss.clipped > 0);
    CHECK(loss.clipped < buf.size());
    auto check_net = [&](Params ActorCritic::*net, const Params& analytic_grad) {
      const auto sizes = (model.*net).layer_sizes();
      Eigen::VectorXd theta = nn::flatten(model.*net);
      const Eigen::VectorXd analytic = nn::flatten(analytic_grad);
      for (int k = 0; k < 200; ++k) {
        const auto i = static_cast<Eigen::Index>(rng.below(theta.size()));
        auto probe = model;
        const double h = 1e-6;
        Eigen::VectorXd th = theta;
        th[i] += h;
        probe.*net = nn::unflatten<double>(th, sizes);
        const double up = minibatch_loss(probe, buf, adv, ret, idx, cfg).total;
        th[i] -= 2 * h;
        probe.*net = nn::unflatten<double>(th, sizes);
        const double down = minibatch_loss(probe, buf, adv, ret, idx, cfg).total;
        const double fd = (up - down) / (2 * h);
        const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
        REQUIRE(std::abs(fd - analytic[i]) / denom < 1e-4);
      }
    };
    check_net(&ActorCritic::policy, loss.policy_grad);
    check_net(&ActorCritic::value, loss.value_grad);
  }
}

TEST_CASE("ppo_update rejects non-finite losses") {
  Xoshiro256 rng(4);
  auto model = init_actor_critic(rng);
  LulcEnvironment env(make_seed_grid(), EnvConfig{}, default_coefficients());
  const auto buf = collect_rollout(env, model.policy, model.value, 32, rng);
  auto adv = compute_gae(buf, 0.99, 0.95);
  adv.returns[3] = std::nan("");
  try {
    ppo_update(model, buf, adv, PpoConfig{}, rng);
    FAIL("expected NonFiniteLoss");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNonFiniteLoss);
  }
}

TEST_CASE("ppo config validation") {
  PpoConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.clip_epsilon = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.gamma = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.gae_lambda = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("training") {
  const auto grid = make_seed_grid();
  const auto table = default_coefficients();
  PpoConfig cfg;
  cfg.rollout_horizon = 512;
  cfg.minibatch_size = 128;
  cfg.seed = 77;

  SUBCASE("zero updates return the initialization") {
    cfg.total_updates = 0;
    const auto r = train(grid, EnvConfig{}, table, cfg);
    CHECK(r.stats.empty());
    CHECK(r.state == init_trainer_state(cfg));
  }
  SUBCASE("same seed, same result") {
    cfg.total_updates = 3;
    const auto a = train(grid, EnvConfig{}, table, cfg);
    const auto b = train(grid, EnvConfig{}, table, cfg);
    CHECK(a.state == b.state);
    CHECK(format_stats_csv(a.stats) == format_stats_csv(b.stats));
    cfg.seed = 78;
    CHECK_FALSE(train(grid, EnvConfig{}, table, cfg).state == a.state);
  }
  SUBCASE("parallel rollouts are reproducible for a fixed worker count") {
    cfg.total_updates = 2;
    cfg.workers = 3;
    const auto a = train(grid, EnvConfig{}, table, cfg);
    const auto b = train(grid, EnvConfig{}, table, cfg);
    CHECK(a.state == b.state);
    CHECK(a.state.rngs.size() == 4);
  }
  SUBCASE("mean reward improves and parameters stay finite") {
    cfg.rollout_horizon = 1024;
    cfg.minibatch_size = 256;
    cfg.total_updates = 20;
    TrainHooks hooks;
    hooks.on_update = [](const TrainerState& s, const TrainStats& st) {
      REQUIRE(s.model.policy.all_finite());
      REQUIRE(s.model.value.all_finite());
      REQUIRE(st.clip_fraction >= 0.0);
      REQUIRE(st.clip_fraction <= 1.0);
    };
    const auto r = train(grid, EnvConfig{}, table, cfg, hooks);
    REQUIRE(r.stats.size() == 20);
    CHECK(r.stats.back().mean_reward > r.stats.front().mean_reward);
    CHECK(r.stats.back().entropy < r.stats.front().entropy);
  }
}

TEST_CASE("two-pixel toy environment converges to wetland") {
  const auto start = std::chrono::steady_clock::now();
  PpoConfig cfg;
  cfg.total_updates = 50;
  cfg.seed = 1;
  LulcEnvironment probe(toy_grid(), EnvConfig{}, default_coefficients());
  probe.step(static_cast<int>(C::kWetland));
  const auto obs = probe.observation();
  const auto mask = probe.action_mask();
  REQUIRE(mask[static_cast<std::size_t>(C::kWater)]);

  int converged_at = -1;
  TrainHooks hooks;
  hooks.on_update = [&](const TrainerState& s, const TrainStats& st) {
    const double p = policy_distribution(s.model.policy, obs, mask)
                         .probs()[static_cast<int>(C::kWetland)];
    if (converged_at < 0 && p > 0.99) converged_at = st.update;
  };
  train(toy_grid(), EnvConfig{}, default_coefficients(), cfg, hooks);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("toy converged at update " << converged_at << " in " << secs << " s");
  CHECK(converged_at > 0);
  CHECK(converged_at <= 50);
  CHECK(secs < 30.0);
}
