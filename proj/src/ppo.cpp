#include "lulc/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "lulc/error.hpp"
#include "lulc/io.hpp"

namespace lulc {

void PpoConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(ErrorKind::kInvalidArgument, std::string("ppo: ") + what);
  };
  require(clip_epsilon > 0.0 && clip_epsilon < 1.0, "clip_epsilon must be in (0,1)");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0,1]");
  require(gae_lambda >= 0.0 && gae_lambda <= 1.0, "gae_lambda must be in [0,1]");
  require(epochs_per_update >= 1, "epochs_per_update must be >= 1");
  require(minibatch_size >= 1, "minibatch_size must be >= 1");
  require(rollout_horizon >= 1, "rollout_horizon must be >= 1");
  require(value_coef >= 0.0, "value_coef must be >= 0");
  require(entropy_coef >= 0.0, "entropy_coef must be >= 0");
  require(learning_rate > 0.0, "learning_rate must be > 0");
  require(total_updates >= 0, "total_updates must be >= 0");
  require(workers >= 1 && workers <= rollout_horizon, "workers must be in [1, rollout_horizon]");
}

ActorCritic init_actor_critic(Xoshiro256& rng) {
  ActorCritic m;
  m.policy = nn::init_mlp<double>(kPolicySizes, rng, kPolicyOutputGain);
  m.value = nn::init_mlp<double>(kValueSizes, rng);
  m.policy_adam = nn::AdamState<double>::for_params(m.policy);
  m.value_adam = nn::AdamState<double>::for_params(m.value);
  return m;
}

PolicyDist policy_distribution(const Params& policy, const Observation& obs,
                               const ActionMask& mask) {
  const Eigen::Matrix<double, kNumActions, 1> logits = nn::forward(policy, obs);
  return PolicyDist(logits, mask);
}

double state_value(const Params& value, const Observation& obs) {
  return nn::forward(value, obs)(0, 0);
}

void RolloutBuffer::append(const RolloutBuffer& other) {
  auto cat = [](auto& dst, const auto& src) { dst.insert(dst.end(), src.begin(), src.end()); };
  cat(observations, other.observations);
  cat(masks, other.masks);
  cat(actions, other.actions);
  cat(log_probs, other.log_probs);
  cat(rewards, other.rewards);
  cat(values, other.values);
  cat(dones, other.dones);
  cat(episode_final_runoffs, other.episode_final_runoffs);
  bootstrap_value = other.bootstrap_value;
}

RolloutBuffer collect_rollout(LulcEnvironment& env, const Params& policy,
                              const Params& value, int horizon, Xoshiro256& rng) {
  if (horizon < 1) fail(ErrorKind::kInvalidArgument, "rollout horizon must be >= 1");
  RolloutBuffer buf;
  buf.observations.reserve(horizon);
  Observation obs = env.observation();
  bool last_done = false;
  for (int t = 0; t < horizon; ++t) {
    const auto mask = env.action_mask();
    const auto dist = policy_distribution(policy, obs, mask);
    const auto [action, log_prob] = dist.sample(rng);
    buf.observations.push_back(obs);
    buf.masks.push_back(mask);
    buf.actions.push_back(action);
    buf.log_probs.push_back(log_prob);
    buf.values.push_back(state_value(value, obs));

    const auto result = env.step(action);
    buf.rewards.push_back(result.reward);
    buf.dones.push_back(result.done ? 1 : 0);
    last_done = result.done;
    if (result.done) {
      buf.episode_final_runoffs.push_back(env.state().current_runoff_m3_per_s());
      obs = env.reset();
    } else {
      obs = result.observation;
    }
  }
  buf.bootstrap_value = last_done ? 0.0 : state_value(value, obs);
  return buf;
}

Advantages compute_gae(const RolloutBuffer& buffer, double gamma, double lambda) {
  const auto n = buffer.size();
  Advantages out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_value = t + 1 < n ? buffer.values[t + 1] : buffer.bootstrap_value;
    const double live = buffer.dones[t] ? 0.0 : 1.0;
    const double delta = buffer.rewards[t] + gamma * next_value * live - buffer.values[t];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[t] = next_adv;
    out.returns[t] = next_adv + buffer.values[t];
  }
  return out;
}

double clipped_surrogate(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

MinibatchLoss minibatch_loss(const ActorCritic& model, const RolloutBuffer& buffer,
                             std::span<const double> advantages,
                             std::span<const double> returns,
                             std::span<const std::size_t> indices, const PpoConfig& cfg) {
  const auto b = static_cast<Eigen::Index>(indices.size());
  Eigen::MatrixXd obs(kObservationSize, b);
  for (Eigen::Index j = 0; j < b; ++j) obs.col(j) = buffer.observations[indices[j]];

  nn::ForwardCache<double> pcache;
  nn::ForwardCache<double> vcache;
  const Eigen::MatrixXd logits = nn::forward(model.policy, obs, &pcache);
  const Eigen::MatrixXd values = nn::forward(model.value, obs, &vcache);

  MinibatchLoss out;
  Eigen::MatrixXd logit_grad(kNumActions, b);
  Eigen::MatrixXd value_grad(1, b);
  const double eps = cfg.clip_epsilon;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const auto i = indices[j];
    const PolicyDist dist(logits.col(j), buffer.masks[i]);
    const int a = buffer.actions[i];
    const double ratio = std::exp(dist.log_prob(a) - buffer.log_probs[i]);
    const double advantage = advantages[i];
    const double surrogate = clipped_surrogate(ratio, advantage, eps);
    out.policy_loss -= surrogate * inv_b;
    if (ratio < 1.0 - eps || ratio > 1.0 + eps) ++out.clipped;
    // The gradient flows through the unclipped branch only when it is the min.
    const double dlogp = ratio * advantage <= surrogate ? -ratio * advantage * inv_b : 0.0;
    Eigen::Matrix<double, kNumActions, 1> g = -dlogp * dist.probs();
    g[a] += dlogp;
    out.entropy += dist.entropy() * inv_b;
    g -= cfg.entropy_coef * inv_b * dist.entropy_grad();
    logit_grad.col(j) = g;

    const double err = values(0, j) - returns[i];
    out.value_loss += err * err * inv_b;
    value_grad(0, j) = cfg.value_coef * 2.0 * err * inv_b;
  }
  out.total = out.policy_loss + cfg.value_coef * out.value_loss - cfg.entropy_coef * out.entropy;
  out.policy_grad = nn::backward(model.policy, pcache, logit_grad);
  out.value_grad = nn::backward(model.value, vcache, value_grad);
  return out;
}

UpdateStats ppo_update(ActorCritic& model, const RolloutBuffer& buffer,
                       const Advantages& adv, const PpoConfig& cfg,
                       Xoshiro256& rng) {
  const auto n = buffer.size();
  if (adv.advantages.size() != n || adv.returns.size() != n) {
    fail(ErrorKind::kShapeMismatch, "ppo_update: advantages do not match buffer");
  }
  UpdateStats stats;
  if (n == 0) return stats;

  const Eigen::Map<const Eigen::VectorXd> raw(adv.advantages.data(),
                                              static_cast<Eigen::Index>(n));
  const double mean = raw.mean();
  const double stddev = std::sqrt((raw.array() - mean).square().mean());
  const std::vector<double> norm_adv = [&] {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (adv.advantages[i] - mean) / (stddev + 1e-8);
    return v;
  }();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto adam_cfg = cfg.adam();
  std::size_t batches = 0;
  std::size_t clipped = 0;
  std::size_t samples = 0;

  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    deterministic_shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += cfg.minibatch_size) {
      const auto end = std::min(n, start + static_cast<std::size_t>(cfg.minibatch_size));
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const auto loss = minibatch_loss(model, buffer, norm_adv, adv.returns, idx, cfg);
      if (!std::isfinite(loss.total)) {
        fail(ErrorKind::kNonFiniteLoss,
             "non-finite loss at epoch " + std::to_string(epoch) + ", minibatch offset " +
                 std::to_string(start) + ": policy " + format_double(loss.policy_loss) +
                 ", value " + format_double(loss.value_loss) + ", entropy " +
                 format_double(loss.entropy));
      }
      nn::adam_update(model.policy, loss.policy_grad, model.policy_adam, adam_cfg);
      nn::adam_update(model.value, loss.value_grad, model.value_adam, adam_cfg);
      if (!model.policy.all_finite() || !model.value.all_finite()) {
        fail(ErrorKind::kNonFiniteLoss,
             "non-finite parameters after epoch " + std::to_string(epoch) +
                 ", minibatch offset " + std::to_string(start));
      }
      stats.policy_loss += loss.policy_loss;
      stats.value_loss += loss.value_loss;
      stats.entropy += loss.entropy;
      clipped += loss.clipped;
      samples += idx.size();
      ++batches;
    }
  }
  stats.policy_loss /= static_cast<double>(batches);
  stats.value_loss /= static_cast<double>(batches);
  stats.entropy /= static_cast<double>(batches);
  stats.clip_fraction = static_cast<double>(clipped) / static_cast<double>(samples);
  return stats;
}

TrainerState init_trainer_state(const PpoConfig& cfg) {
  TrainerState state;
  state.seed = cfg.seed;
  for (int k = 0; k <= cfg.workers; ++k) {
    state.rngs.push_back(Xoshiro256::stream(cfg.seed, static_cast<std::uint64_t>(k)));
  }
  state.model = init_actor_critic(state.rngs[0]);
  return state;
}

TrainResult train(const LulcGrid& grid, const EnvConfig& env_cfg,
                  const CoefficientTable& table, const PpoConfig& cfg,
                  const TrainHooks& hooks) {
  cfg.validate();
  TrainResult result{init_trainer_state(cfg), {}};
  auto& state = result.state;

  std::vector<LulcEnvironment> envs;
  for (int k = 0; k < cfg.workers; ++k) envs.emplace_back(grid, env_cfg, table);
  std::vector<int> horizons(cfg.workers, cfg.rollout_horizon / cfg.workers);
  for (int k = 0; k < cfg.rollout_horizon % cfg.workers; ++k) ++horizons[k];

  for (int u = 0; u < cfg.total_updates; ++u) {
    std::vector<RolloutBuffer> parts(cfg.workers);
    auto collect = [&](int k) {
      parts[k] = collect_rollout(envs[k], state.model.policy, state.model.value,
                                 horizons[k], state.rngs[k + 1]);
    };
    if (cfg.workers == 1) {
      collect(0);
    } else {
      std::vector<std::jthread> threads;
      for (int k = 0; k < cfg.workers; ++k) threads.emplace_back(collect, k);
    }

    RolloutBuffer batch;
    Advantages adv;
    for (const auto& part : parts) {
      const auto a = compute_gae(part, cfg.gamma, cfg.gae_lambda);
      batch.append(part);
      adv.advantages.insert(adv.advantages.end(), a.advantages.begin(), a.advantages.end());
      adv.returns.insert(adv.returns.end(), a.returns.begin(), a.returns.end());
    }

    const auto upd = ppo_update(state.model, batch, adv, cfg, state.rngs[0]);
    ++state.update;

    TrainStats s;
    s.update = u + 1;
    s.mean_reward = std::accumulate(batch.rewards.begin(), batch.rewards.end(), 0.0) /
                    static_cast<double>(batch.size());
    s.policy_loss = upd.policy_loss;
    s.value_loss = upd.value_loss;
    s.entropy = upd.entropy;
    s.clip_fraction = upd.clip_fraction;
    s.final_episode_runoff = batch.episode_final_runoffs.empty()
                                 ? envs.back().state().current_runoff_m3_per_s()
                                 : batch.episode_final_runoffs.back();
    result.stats.push_back(s);
    if (hooks.on_update) hooks.on_update(state, s);
  }
  return result;
}

std::string format_stats_csv(const std::vector<TrainStats>& stats) {
  std::string out =
      "update,mean_reward,policy_loss,value_loss,entropy,clip_fraction,final_episode_runoff\n";
  for (const auto& s : stats) {
    out += std::to_string(s.update) + "," + format_double(s.mean_reward) + "," +
           format_double(s.policy_loss) + "," + format_double(s.value_loss) + "," +
           format_double(s.entropy) + "," + format_double(s.clip_fraction) + "," +
           format_double(s.final_episode_runoff) + "\n";
  }
  return out;
}

}  // namespace lulc
