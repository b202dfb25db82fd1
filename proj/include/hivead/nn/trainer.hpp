#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "hivead/error.hpp"
#include "hivead/nn/adam.hpp"
#include "hivead/nn/autoencoder.hpp"
#include "hivead/random.hpp"

namespace hivead::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int max_epochs = 100;
  int patience = 5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;  ///< minibatch shuffling

  AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

template <typename Scalar>
struct TrainResult {
  Autoencoder<Scalar> model;  ///< parameters of the best validation epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  bool early_stopped = false;

  int epochs_run() const { return static_cast<int>(history.size()); }
};

/// Mean per-window reconstruction MSE, evaluated in fixed-size chunks.
template <typename Scalar, typename Derived>
double mean_window_loss(const Autoencoder<Scalar>& model, const Eigen::MatrixBase<Derived>& windows,
                        Index chunk = 512) {
  if (windows.cols() == 0) return 0.0;
  double total = 0.0;
  for (Index start = 0; start < windows.cols(); start += chunk) {
    const Index len = std::min(chunk, windows.cols() - start);
    total += static_cast<double>(window_errors(model, windows.middleCols(start, len)).sum());
  }
  return total / static_cast<double>(windows.cols());
}

/// Minibatch Adam on shuffled training windows (one per column) with early
/// stopping on the mean validation loss; returns the best-validation weights.
template <typename Scalar, typename DerivedT, typename DerivedV>
TrainResult<Scalar> train(Autoencoder<Scalar> model, const Eigen::MatrixBase<DerivedT>& train_windows,
                          const Eigen::MatrixBase<DerivedV>& val_windows, const TrainConfig& config) {
  if (train_windows.cols() == 0) throw Error(ErrorCode::EmptyDataset, "no training windows");
  if (val_windows.cols() == 0) throw Error(ErrorCode::EmptyDataset, "no validation windows");
  if (config.patience < 1) throw Error(ErrorCode::InvalidArgument, "patience must be >= 1");
  if (config.batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");
  if (!(config.learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
  if (config.max_epochs < 1) throw Error(ErrorCode::InvalidArgument, "max epochs must be >= 1");
  detail::check_batch(model, train_windows);
  detail::check_batch(model, val_windows);

  const Index n = train_windows.cols();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));

  Rng rng(config.seed);
  AdamState<Scalar> adam;
  const AdamConfig adam_config = config.adam();
  Vector<Scalar> params = model.flatten();
  Autoencoder<Scalar> grad;
  Matrix<Scalar> batch;

  TrainResult<Scalar> result;
  result.model = model;
  int since_best = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    double train_total = 0.0;
    for (Index start = 0; start < n; start += config.batch_size) {
      const Index len = std::min<Index>(config.batch_size, n - start);
      batch.resize(train_windows.rows(), len);
      for (Index j = 0; j < len; ++j) batch.col(j) = train_windows.col(order[static_cast<std::size_t>(start + j)]);
      const Scalar loss = loss_and_gradient(model, batch, grad);
      train_total += static_cast<double>(loss) * static_cast<double>(len);
      adam_step<Scalar>(params, grad.flatten(), adam, adam_config);
      model.assign(params);
    }

    const double val_loss = mean_window_loss(model, val_windows);
    result.history.push_back({epoch, train_total / static_cast<double>(n), val_loss});
    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

}  // namespace hivead::nn
