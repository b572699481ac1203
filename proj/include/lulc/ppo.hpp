#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lulc/environment.hpp"
#include "lulc/nn/adam.hpp"
#include "lulc/nn/categorical.hpp"
#include "lulc/nn/mlp.hpp"
#include "lulc/rng.hpp"

namespace lulc {

using Params = nn::MlpParams<double>;
using PolicyDist = nn::CategoricalDist<double, kNumActions>;

inline const nn::LayerSizes kPolicySizes = {kObservationSize, 64, 64, kNumActions};
inline const nn::LayerSizes kValueSizes = {kObservationSize, 64, 64, 1};
inline constexpr double kPolicyOutputGain = 0.01;

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  int epochs_per_update = 4;
  int minibatch_size = 256;
  int rollout_horizon = 2048;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double learning_rate = 3e-4;
  int total_updates = 200;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
  nn::AdamConfig adam() const { return {.learning_rate = learning_rate}; }
};

// Actor (policy logits) and Critic (state value) with their optimizer state.
struct ActorCritic {
  Params policy;
  Params value;
  nn::AdamState<double> policy_adam;
  nn::AdamState<double> value_adam;

  friend bool operator==(const ActorCritic&, const ActorCritic&) = default;
};

// Policy layers drawn first, then value layers, from the same stream.
ActorCritic init_actor_critic(Xoshiro256& rng);

PolicyDist policy_distribution(const Params& policy, const Observation& obs,
                               const ActionMask& mask);
double state_value(const Params& value, const Observation& obs);

struct RolloutBuffer {
  std::vector<Observation> observations;
  std::vector<ActionMask> masks;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  double bootstrap_value = 0.0;

  // Runoff at the end of each episode completed inside this rollout.
  std::vector<double> episode_final_runoffs;

  std::size_t size() const { return actions.size(); }
  void append(const RolloutBuffer& other);
};

// Steps `env` for `horizon` masked, sampled actions, resetting after each
// finished episode. The bootstrap value is 0 when the last step ended an
// episode, V(s_T) otherwise.
RolloutBuffer collect_rollout(LulcEnvironment& env, const Params& policy,
                              const Params& value, int horizon, Xoshiro256& rng);

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Unnormalized GAE; returns = advantages + old values.
Advantages compute_gae(const RolloutBuffer& buffer, double gamma, double lambda);

// min(rho * A, clip(rho, 1-eps, 1+eps) * A)
double clipped_surrogate(double ratio, double advantage, double epsilon);

// Loss terms and parameter gradients of one minibatch:
// total = policy_loss + value_coef * value_loss - entropy_coef * entropy.
struct MinibatchLoss {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  std::size_t clipped = 0;  // samples with ratio outside [1-eps, 1+eps]
  Params policy_grad;
  Params value_grad;
};

MinibatchLoss minibatch_loss(const ActorCritic& model, const RolloutBuffer& buffer,
                             std::span<const double> advantages,
                             std::span<const double> returns,
                             std::span<const std::size_t> indices, const PpoConfig& cfg);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// Clipped-surrogate epochs over shuffled minibatches; advantages are
// normalized over the whole batch first. Throws kNonFiniteLoss.
UpdateStats ppo_update(ActorCritic& model, const RolloutBuffer& buffer,
                       const Advantages& adv, const PpoConfig& cfg,
                       Xoshiro256& rng);

struct TrainStats {
  int update = 0;
  double mean_reward = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double final_episode_runoff = 0.0;
};

// Stream 0 drives initialization and minibatch shuffling; worker k samples
// actions from stream k + 1.
struct TrainerState {
  ActorCritic model;
  std::vector<Xoshiro256> rngs;
  std::int64_t update = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainerState&, const TrainerState&) = default;
};

TrainerState init_trainer_state(const PpoConfig& cfg);

struct TrainHooks {
  // Called after every completed update with the running state.
  std::function<void(const TrainerState&, const TrainStats&)> on_update;
};

struct TrainResult {
  TrainerState state;
  std::vector<TrainStats> stats;
};

TrainResult train(const LulcGrid& grid, const EnvConfig& env_cfg,
                  const CoefficientTable& table, const PpoConfig& cfg,
                  const TrainHooks& hooks = {});

std::string format_stats_csv(const std::vector<TrainStats>& stats);

}  // namespace lulc
