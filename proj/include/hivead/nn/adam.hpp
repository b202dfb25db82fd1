#pragma once

#include <Eigen/Core>
#include <cmath>

#include "hivead/error.hpp"
#include "hivead/nn/lstm.hpp"

namespace hivead::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename Scalar>
struct AdamState {
  Vector<Scalar> m;
  Vector<Scalar> v;
  long long step = 0;
};

/// One Adam update with bias correction. An empty state is initialised to zero moments.
template <typename Scalar>
void adam_step(Eigen::Ref<Vector<Scalar>> params, const Eigen::Ref<const Vector<Scalar>>& grads,
               AdamState<Scalar>& state, const AdamConfig& config) {
  if (grads.size() != params.size())
    throw Error(ErrorCode::ShapeMismatch, "gradient size does not match parameter size");
  if (state.m.size() == 0 && state.v.size() == 0 && state.step == 0) {
    state.m = Vector<Scalar>::Zero(params.size());
    state.v = Vector<Scalar>::Zero(params.size());
  }
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw Error(ErrorCode::ShapeMismatch, "optimizer state size does not match parameter size");

  const Scalar b1 = static_cast<Scalar>(config.beta1);
  const Scalar b2 = static_cast<Scalar>(config.beta2);
  ++state.step;
  state.m = b1 * state.m + (Scalar(1) - b1) * grads;
  state.v = b2 * state.v + (Scalar(1) - b2) * grads.cwiseAbs2();

  const Scalar c1 = Scalar(1) - static_cast<Scalar>(std::pow(config.beta1, static_cast<double>(state.step)));
  const Scalar c2 = Scalar(1) - static_cast<Scalar>(std::pow(config.beta2, static_cast<double>(state.step)));
  const Scalar lr = static_cast<Scalar>(config.learning_rate);
  const Scalar eps = static_cast<Scalar>(config.eps);
  params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + eps);
}

}  // namespace hivead::nn
