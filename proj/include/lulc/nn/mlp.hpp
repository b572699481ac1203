#pragma once

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "lulc/error.hpp"
#include "lulc/rng.hpp"

namespace lulc::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using LayerSizes = std::vector<Eigen::Index>;

// Fully connected net: tanh on hidden layers, linear output.
// weights[l] is (sizes[l+1] x sizes[l]).
template <typename Scalar>
struct MlpParams {
  std::vector<Matrix<Scalar>> weights;
  std::vector<Vector<Scalar>> biases;

  static MlpParams zeros(const LayerSizes& sizes) {
    if (sizes.size() < 2) fail(ErrorKind::kShapeMismatch, "mlp needs at least two layer sizes");
    MlpParams p;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      p.weights.push_back(Matrix<Scalar>::Zero(sizes[l + 1], sizes[l]));
      p.biases.push_back(Vector<Scalar>::Zero(sizes[l + 1]));
    }
    return p;
  }

  std::size_t num_layers() const { return weights.size(); }
  Eigen::Index input_size() const { return weights.front().cols(); }
  Eigen::Index output_size() const { return weights.back().rows(); }

  LayerSizes layer_sizes() const {
    LayerSizes sizes{input_size()};
    for (const auto& w : weights) sizes.push_back(w.rows());
    return sizes;
  }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  bool all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    }
    return true;
  }

  friend bool operator==(const MlpParams& a, const MlpParams& b) {
    if (a.weights.size() != b.weights.size()) return false;
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
      if (a.weights[l].rows() != b.weights[l].rows() ||
          a.weights[l].cols() != b.weights[l].cols() ||
          a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) {
        return false;
      }
    }
    return true;
  }
};

// Visits matching (weight, bias) blocks of several same-shaped parameter sets
// in layer order, weights before biases.
template <typename Fn, typename... Params>
void for_each_block(Fn&& fn, Params&... params) {
  const auto& first = std::get<0>(std::tie(params...));
  for (std::size_t l = 0; l < first.weights.size(); ++l) {
    fn(params.weights[l]...);
    fn(params.biases[l]...);
  }
}

// Flat view used by checkpoints and finite-difference checks.
template <typename Scalar>
Vector<Scalar> flatten(const MlpParams<Scalar>& p) {
  Vector<Scalar> out(p.parameter_count());
  Eigen::Index offset = 0;
  for_each_block(
      [&](const auto& block) {
        out.segment(offset, block.size()) = block.reshaped();
        offset += block.size();
      },
      p);
  return out;
}

template <typename Scalar>
MlpParams<Scalar> unflatten(const Eigen::Ref<const Vector<Scalar>>& flat,
                            const LayerSizes& sizes) {
  auto p = MlpParams<Scalar>::zeros(sizes);
  if (flat.size() != p.parameter_count()) {
    fail(ErrorKind::kShapeMismatch,
         "parameter vector has " + std::to_string(flat.size()) + " entries, expected " +
             std::to_string(p.parameter_count()));
  }
  Eigen::Index offset = 0;
  for_each_block(
      [&](auto& block) {
        block.reshaped() = flat.segment(offset, block.size());
        offset += block.size();
      },
      p);
  return p;
}

// Uniform(-gain_l/sqrt(fan_in), gain_l/sqrt(fan_in)) weights, zero biases;
// gain_l is 1 except `output_gain` on the last layer.
template <typename Scalar>
MlpParams<Scalar> init_mlp(const LayerSizes& sizes, Xoshiro256& rng,
                           Scalar output_gain = Scalar(1)) {
  auto p = MlpParams<Scalar>::zeros(sizes);
  for (std::size_t l = 0; l < p.num_layers(); ++l) {
    auto& w = p.weights[l];
    Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(w.cols()));
    if (l + 1 == p.num_layers()) bound *= output_gain;
    // column-major fill order is part of the reproducibility contract
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        w(i, j) = bound * static_cast<Scalar>(2.0 * rng.uniform() - 1.0);
      }
    }
  }
  return p;
}

// Per-layer activations kept for backprop: activations[0] is the input,
// activations[l] the tanh output of hidden layer l.
template <typename Scalar>
struct ForwardCache {
  std::vector<Matrix<Scalar>> activations;
};

// Batched forward pass; `input` is (input_size x batch).
template <typename Scalar, typename Derived>
Matrix<Scalar> forward(const MlpParams<Scalar>& p,
                       const Eigen::MatrixBase<Derived>& input,
                       ForwardCache<Scalar>* cache = nullptr) {
  if (input.rows() != p.input_size()) {
    fail(ErrorKind::kShapeMismatch,
         "input has " + std::to_string(input.rows()) + " rows, expected " +
             std::to_string(p.input_size()));
  }
  Matrix<Scalar> a = input;
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(a);
  }
  for (std::size_t l = 0; l < p.num_layers(); ++l) {
    Matrix<Scalar> z = (p.weights[l] * a).colwise() + p.biases[l];
    if (l + 1 == p.num_layers()) return z;
    a = z.array().tanh().matrix();
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

// Gradients of sum(output_grad .* forward(input)) with respect to every
// parameter, given the cache from the matching forward call.
template <typename Scalar, typename Derived>
MlpParams<Scalar> backward(const MlpParams<Scalar>& p, const ForwardCache<Scalar>& cache,
                           const Eigen::MatrixBase<Derived>& output_grad) {
  const auto& acts = cache.activations;
  if (acts.size() != p.num_layers() || output_grad.rows() != p.output_size() ||
      output_grad.cols() != acts.front().cols()) {
    fail(ErrorKind::kShapeMismatch, "backward: output gradient does not match forward pass");
  }
  MlpParams<Scalar> g;
  g.weights.resize(p.num_layers());
  g.biases.resize(p.num_layers());
  Matrix<Scalar> delta = output_grad;
  for (std::size_t l = p.num_layers(); l-- > 0;) {
    g.weights[l].noalias() = delta * acts[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Matrix<Scalar> up = p.weights[l].transpose() * delta;
      delta = up.array() * (Scalar(1) - acts[l].array().square());
    }
  }
  return g;
}

}  // namespace lulc::nn
