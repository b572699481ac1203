#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <optional>

#include "lulc/rng.hpp"

namespace lulc::nn {

inline constexpr double kMaskedLogit = -1e9;

// Categorical distribution over a fixed number of actions, parameterized by
// logits. Masked actions get logit -1e9 before normalization.
template <typename Scalar, int N>
class CategoricalDist {
 public:
  using Logits = Eigen::Matrix<Scalar, N, 1>;
  using Mask = std::array<bool, N>;

  template <typename Derived>
  explicit CategoricalDist(const Eigen::MatrixBase<Derived>& logits,
                           const std::optional<Mask>& mask = std::nullopt)
      : logits_(logits) {
    if (mask) {
      for (int a = 0; a < N; ++a) {
        if (!(*mask)[a]) logits_[a] = Scalar(kMaskedLogit);
      }
    }
    const Scalar top = logits_.maxCoeff();
    const Scalar lse = top + std::log((logits_.array() - top).exp().sum());
    log_probs_ = logits_.array() - lse;
    probs_ = log_probs_.array().exp();
  }

  const Logits& logits() const { return logits_; }
  const Logits& probs() const { return probs_; }
  const Logits& log_probs() const { return log_probs_; }
  Scalar log_prob(int action) const { return log_probs_[action]; }

  Scalar entropy() const {
    Scalar h = 0;
    for (int a = 0; a < N; ++a) {
      if (probs_[a] > 0) h -= probs_[a] * log_probs_[a];
    }
    return h;
  }

  // d entropy / d logits
  Logits entropy_grad() const {
    const Scalar h = entropy();
    Logits g;
    for (int a = 0; a < N; ++a) {
      g[a] = probs_[a] > 0 ? -probs_[a] * (log_probs_[a] + h) : Scalar(0);
    }
    return g;
  }

  // Inverse CDF over one uniform draw u in [0,1).
  int sample_with(double u) const {
    Scalar cdf = 0;
    int last_positive = 0;
    for (int a = 0; a < N; ++a) {
      if (probs_[a] <= 0) continue;
      cdf += probs_[a];
      last_positive = a;
      if (u < cdf) return a;
    }
    return last_positive;
  }

  struct Sample {
    int action;
    Scalar log_prob;
  };

  Sample sample(Xoshiro256& rng) const {
    const int a = sample_with(rng.uniform());
    return {a, log_probs_[a]};
  }

  // Highest-probability action, lowest index on ties.
  int mode() const {
    int best = 0;
    for (int a = 1; a < N; ++a) {
      if (logits_[a] > logits_[best]) best = a;
    }
    return best;
  }

 private:
  Logits logits_;
  Logits log_probs_;
  Logits probs_;
};

}  // namespace lulc::nn
