#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>

#include "lulc/nn/mlp.hpp"

namespace lulc::nn {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  MlpParams<Scalar> first_moment;
  MlpParams<Scalar> second_moment;
  std::int64_t step = 0;

  static AdamState for_params(const MlpParams<Scalar>& p) {
    const auto sizes = p.layer_sizes();
    return {MlpParams<Scalar>::zeros(sizes), MlpParams<Scalar>::zeros(sizes), 0};
  }

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// One bias-corrected Adam step on a single dense block; `step` is the
// 1-based count of the update being applied.
template <typename DX, typename DG, typename DM, typename DV>
void adam_apply(Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DG>& g,
                Eigen::MatrixBase<DM>& m, Eigen::MatrixBase<DV>& v,
                std::int64_t step, const AdamConfig& cfg) {
  using Scalar = typename DX::Scalar;
  const Scalar b1 = static_cast<Scalar>(cfg.beta1);
  const Scalar b2 = static_cast<Scalar>(cfg.beta2);
  m = b1 * m + (Scalar(1) - b1) * g;
  v = b2 * v + (Scalar(1) - b2) * g.cwiseAbs2();
  const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(step));
  const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(step));
  const Scalar lr = static_cast<Scalar>(cfg.learning_rate);
  const Scalar eps = static_cast<Scalar>(cfg.epsilon);
  x.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

template <typename Scalar>
void adam_update(MlpParams<Scalar>& params, const MlpParams<Scalar>& grads,
                 AdamState<Scalar>& state, const AdamConfig& cfg) {
  ++state.step;
  for_each_block(
      [&](auto& x, const auto& g, auto& m, auto& v) {
        adam_apply(x, g, m, v, state.step, cfg);
      },
      params, grads, state.first_moment, state.second_moment);
}

}  // namespace lulc::nn
