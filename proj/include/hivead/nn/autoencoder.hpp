#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hivead/error.hpp"
#include "hivead/normalization.hpp"
#include "hivead/nn/lstm.hpp"
#include "hivead/random.hpp"

namespace hivead::nn {

inline constexpr int kMinHiddenSize = 2;
inline constexpr int kMaxHiddenSize = 64;
inline constexpr int kMinLayers = 1;
inline constexpr int kMaxLayers = 4;

/// Stacked LSTM encoder/decoder over univariate windows.
///
/// The encoder reads the window one value per step; the top layer's final
/// hidden state is the latent code. Every decoder layer starts from
/// h = latent, c = 0, and the bottom decoder layer receives the latent code
/// as its input at every step. A linear projection maps each top decoder
/// hidden state to one reconstructed value, in forward time order.
///
/// The same type doubles as the gradient container.
template <typename Scalar>
struct Autoencoder {
  std::vector<LstmLayer<Scalar>> encoder;
  std::vector<LstmLayer<Scalar>> decoder;
  RowVector<Scalar> projection;  ///< 1 x hs
  Scalar projection_bias = Scalar(0);
  int window_size = 0;
  NormalizationParams norm;
  std::uint64_t seed = 0;

  Index hidden_size() const { return encoder.empty() ? 0 : encoder.front().hidden_size(); }
  int layers() const { return static_cast<int>(encoder.size()); }

  /// Visits every parameter block as (name, data, rows, cols) in a fixed order.
  template <typename F>
  void for_each_block(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each_block(F&& f) const {
    visit(*this, f);
  }

  Index parameter_count() const {
    Index n = 0;
    for_each_block([&](const std::string&, const Scalar*, Index r, Index c) { n += r * c; });
    return n;
  }

  Vector<Scalar> flatten() const {
    Vector<Scalar> out(parameter_count());
    Index pos = 0;
    for_each_block([&](const std::string&, const Scalar* data, Index r, Index c) {
      out.segment(pos, r * c) = Eigen::Map<const Vector<Scalar>>(data, r * c);
      pos += r * c;
    });
    return out;
  }

  void assign(const Eigen::Ref<const Vector<Scalar>>& flat) {
    if (flat.size() != parameter_count()) throw Error(ErrorCode::ShapeMismatch, "flat parameter vector has wrong size");
    Index pos = 0;
    for_each_block([&](const std::string&, Scalar* data, Index r, Index c) {
      Eigen::Map<Vector<Scalar>>(data, r * c) = flat.segment(pos, r * c);
      pos += r * c;
    });
  }

  /// Same shapes and metadata, every parameter zero.
  Autoencoder zeros_like() const {
    Autoencoder out = *this;
    out.for_each_block([](const std::string&, Scalar* data, Index r, Index c) {
      Eigen::Map<Vector<Scalar>>(data, r * c).setZero();
    });
    return out;
  }

  bool operator==(const Autoencoder& o) const {
    return encoder == o.encoder && decoder == o.decoder && projection.size() == o.projection.size() &&
           projection == o.projection && projection_bias == o.projection_bias && window_size == o.window_size &&
           norm == o.norm && seed == o.seed;
  }

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    auto layer_blocks = [&](auto& layer, const std::string& prefix) {
      f(prefix + ".W", layer.W.data(), layer.W.rows(), layer.W.cols());
      f(prefix + ".U", layer.U.data(), layer.U.rows(), layer.U.cols());
      f(prefix + ".b", layer.b.data(), layer.b.rows(), Index(1));
    };
    for (std::size_t l = 0; l < self.encoder.size(); ++l) layer_blocks(self.encoder[l], "encoder." + std::to_string(l));
    for (std::size_t l = 0; l < self.decoder.size(); ++l) layer_blocks(self.decoder[l], "decoder." + std::to_string(l));
    f(std::string("projection.W"), self.projection.data(), Index(1), self.projection.cols());
    f(std::string("projection.b"), &self.projection_bias, Index(1), Index(1));
  }
};

/// Zero-weight model with the right shapes.
template <typename Scalar = double>
Autoencoder<Scalar> make_autoencoder(int hidden_size, int layers, int window_size) {
  if (hidden_size < kMinHiddenSize || hidden_size > kMaxHiddenSize)
    throw Error(ErrorCode::InvalidHyperparameter, "hidden size must lie in [2, 64], got " + std::to_string(hidden_size));
  if (layers < kMinLayers || layers > kMaxLayers)
    throw Error(ErrorCode::InvalidHyperparameter, "layer count must lie in [1, 4], got " + std::to_string(layers));
  if (window_size < 2) throw Error(ErrorCode::InvalidHyperparameter, "window size must be >= 2");

  Autoencoder<Scalar> m;
  for (int l = 0; l < layers; ++l) {
    m.encoder.emplace_back(l == 0 ? 1 : hidden_size, hidden_size);
    m.decoder.emplace_back(hidden_size, hidden_size);
  }
  m.projection = RowVector<Scalar>::Zero(hidden_size);
  m.window_size = window_size;
  return m;
}

/// Uniform weights on [-1/sqrt(hs), 1/sqrt(hs)] drawn in block order from a
/// generator seeded with `seed`; forget-gate biases set to 1.
template <typename Scalar = double>
Autoencoder<Scalar> init_autoencoder(int hidden_size, int layers, int window_size, std::uint64_t seed) {
  Autoencoder<Scalar> m = make_autoencoder<Scalar>(hidden_size, layers, window_size);
  m.seed = seed;
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  m.for_each_block([&](const std::string&, Scalar* data, Index r, Index c) {
    for (Index i = 0; i < r * c; ++i) data[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
  });
  const Index hs = hidden_size;
  for (auto* stack : {&m.encoder, &m.decoder})
    for (auto& layer : *stack) layer.b.segment(hs, hs).setConstant(Scalar(1));
  return m;
}

/// Per-layer step records of a batched forward pass.
template <typename Scalar>
struct ForwardTrace {
  std::vector<std::vector<LstmStep<Scalar>>> encoder;
  std::vector<std::vector<LstmStep<Scalar>>> decoder;
  Matrix<Scalar> latent;  ///< hs x batch
  Matrix<Scalar> output;  ///< window x batch
};

namespace detail {

template <typename Scalar, typename Derived>
void check_batch(const Autoencoder<Scalar>& model, const Eigen::MatrixBase<Derived>& windows) {
  if (windows.rows() != model.window_size)
    throw Error(ErrorCode::LengthMismatch, "window length " + std::to_string(windows.rows()) +
                                               " does not match model window size " + std::to_string(model.window_size));
}

template <typename Scalar>
std::vector<Matrix<Scalar>> outputs_of(const std::vector<LstmStep<Scalar>>& steps) {
  std::vector<Matrix<Scalar>> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.h);
  return out;
}

}  // namespace detail

/// Forward pass over a batch (one window per column), keeping what backward needs.
template <typename Scalar, typename Derived>
ForwardTrace<Scalar> forward_trace(const Autoencoder<Scalar>& model, const Eigen::MatrixBase<Derived>& windows) {
  detail::check_batch(model, windows);
  const Index T = windows.rows();
  const Index B = windows.cols();
  const Index hs = model.hidden_size();

  ForwardTrace<Scalar> ft;
  std::vector<Matrix<Scalar>> inputs(static_cast<std::size_t>(T));
  for (Index t = 0; t < T; ++t) inputs[static_cast<std::size_t>(t)] = windows.row(t);
  for (const auto& layer : model.encoder) {
    ft.encoder.push_back(lstm_forward(layer, inputs, LstmState<Scalar>::zeros(hs, B)));
    inputs = detail::outputs_of(ft.encoder.back());
  }
  ft.latent = ft.encoder.back().back().h;

  inputs.assign(static_cast<std::size_t>(T), ft.latent);
  const LstmState<Scalar> start{ft.latent, Matrix<Scalar>::Zero(hs, B)};
  for (const auto& layer : model.decoder) {
    ft.decoder.push_back(lstm_forward(layer, inputs, start));
    inputs = detail::outputs_of(ft.decoder.back());
  }

  ft.output.resize(T, B);
  for (Index t = 0; t < T; ++t)
    ft.output.row(t) = (model.projection * inputs[static_cast<std::size_t>(t)]).array() + model.projection_bias;
  return ft;
}

/// Reconstructions of a batch (one window per column) without recording steps.
template <typename Scalar, typename Derived>
Matrix<Scalar> reconstruct_batch(const Autoencoder<Scalar>& model, const Eigen::MatrixBase<Derived>& windows) {
  detail::check_batch(model, windows);
  const Index T = windows.rows();
  const Index B = windows.cols();
  const Index hs = model.hidden_size();
  const std::size_t n = model.encoder.size();

  std::vector<LstmState<Scalar>> state(n, LstmState<Scalar>::zeros(hs, B));
  Matrix<Scalar> gates;
  for (Index t = 0; t < T; ++t) {
    lstm_step(model.encoder[0], windows.row(t), state[0], gates);
    for (std::size_t l = 1; l < n; ++l) lstm_step(model.encoder[l], state[l - 1].h, state[l], gates);
  }
  const Matrix<Scalar> latent = state.back().h;

  for (auto& s : state) {
    s.h = latent;
    s.c.setZero();
  }
  Matrix<Scalar> out(T, B);
  for (Index t = 0; t < T; ++t) {
    lstm_step(model.decoder[0], latent, state[0], gates);
    for (std::size_t l = 1; l < n; ++l) lstm_step(model.decoder[l], state[l - 1].h, state[l], gates);
    out.row(t) = (model.projection * state.back().h).array() + model.projection_bias;
  }
  return out;
}

/// Reconstruction of one window.
template <typename Scalar, typename Derived>
Vector<Scalar> reconstruct(const Autoencoder<Scalar>& model, const Eigen::MatrixBase<Derived>& window) {
  static_assert(Derived::ColsAtCompileTime == 1 || Derived::ColsAtCompileTime == Eigen::Dynamic);
  return reconstruct_batch(model, window);
}

/// Mean squared error between a window and its reconstruction.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar reconstruction_loss(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& x_bar) {
  if (x.size() != x_bar.size() || x.size() == 0)
    throw Error(ErrorCode::LengthMismatch, "reconstruction length does not match window length");
  return (x.derived().reshaped() - x_bar.derived().reshaped()).squaredNorm() / static_cast<typename DerivedA::Scalar>(x.size());
}

/// Per-window MSE for a batch.
template <typename Scalar, typename Derived>
Vector<Scalar> window_errors(const Autoencoder<Scalar>& model, const Eigen::MatrixBase<Derived>& windows) {
  const Matrix<Scalar> rec = reconstruct_batch(model, windows);
  return ((rec - windows).colwise().squaredNorm() / static_cast<Scalar>(windows.rows())).transpose();
}

/// Mean over the batch of per-window MSE, and its exact gradient with respect
/// to every parameter (backpropagation through time), written to `grad`.
template <typename Scalar, typename Derived>
Scalar loss_and_gradient(const Autoencoder<Scalar>& model, const Eigen::MatrixBase<Derived>& windows,
                         Autoencoder<Scalar>& grad) {
  const ForwardTrace<Scalar> ft = forward_trace(model, windows);
  const Index T = windows.rows();
  const Index B = windows.cols();
  const Index hs = model.hidden_size();
  const std::size_t n = model.decoder.size();

  const Matrix<Scalar> residual = ft.output - windows;
  const Scalar loss = residual.squaredNorm() / static_cast<Scalar>(T * B);
  const Matrix<Scalar> d_out = residual * (Scalar(2) / static_cast<Scalar>(T * B));

  grad = model.zeros_like();
  grad.projection_bias = d_out.sum();

  const auto& top = ft.decoder.back();
  std::vector<Matrix<Scalar>> dh(static_cast<std::size_t>(T));
  for (Index t = 0; t < T; ++t) {
    const auto k = static_cast<std::size_t>(t);
    grad.projection.noalias() += d_out.row(t) * top[k].h.transpose();
    dh[k].noalias() = model.projection.transpose() * d_out.row(t);
  }

  Matrix<Scalar> d_latent = Matrix<Scalar>::Zero(hs, B);
  LstmState<Scalar> d_init;
  std::vector<Matrix<Scalar>> dx;
  for (std::size_t l = n; l-- > 0;) {
    lstm_backward(model.decoder[l], ft.decoder[l], dh, grad.decoder[l], &dx, d_init);
    d_latent += d_init.h;
    if (l == 0) {
      for (const auto& d : dx) d_latent += d;
    } else {
      dh.swap(dx);
    }
  }

  dh.assign(static_cast<std::size_t>(T), Matrix<Scalar>());
  dh.back() = d_latent;
  for (std::size_t l = n; l-- > 0;) {
    lstm_backward(model.encoder[l], ft.encoder[l], dh, grad.encoder[l], l > 0 ? &dx : nullptr, d_init);
    if (l > 0) dh.swap(dx);
  }
  return loss;
}

/// Gradient of the reconstruction loss of a single window.
template <typename Scalar, typename Derived>
Autoencoder<Scalar> backward(const Autoencoder<Scalar>& model, const Eigen::MatrixBase<Derived>& window) {
  Autoencoder<Scalar> grad;
  loss_and_gradient(model, window, grad);
  return grad;
}

}  // namespace hivead::nn
