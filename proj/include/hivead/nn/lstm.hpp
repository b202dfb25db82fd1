#pragma once

#include <Eigen/Core>
#include <vector>

namespace hivead::nn {

using Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// One LSTM layer. Gate rows are stacked [input, forget, cell candidate, output],
/// `hidden_size()` rows each.
template <typename Scalar>
struct LstmLayer {
  Matrix<Scalar> W;  ///< 4hs x input_size
  Matrix<Scalar> U;  ///< 4hs x hs
  Vector<Scalar> b;  ///< 4hs

  LstmLayer() = default;
  LstmLayer(Index input_size, Index hidden_size)
      : W(Matrix<Scalar>::Zero(4 * hidden_size, input_size)),
        U(Matrix<Scalar>::Zero(4 * hidden_size, hidden_size)),
        b(Vector<Scalar>::Zero(4 * hidden_size)) {}

  Index input_size() const { return W.cols(); }
  Index hidden_size() const { return U.cols(); }

  bool operator==(const LstmLayer& o) const {
    return W.rows() == o.W.rows() && W.cols() == o.W.cols() && U.rows() == o.U.rows() && b.size() == o.b.size() &&
           W == o.W && U == o.U && b == o.b;
  }
};

/// Hidden and cell state for a batch; columns are batch entries.
template <typename Scalar>
struct LstmState {
  Matrix<Scalar> h;
  Matrix<Scalar> c;

  static LstmState zeros(Index hidden, Index batch) {
    return {Matrix<Scalar>::Zero(hidden, batch), Matrix<Scalar>::Zero(hidden, batch)};
  }
};

/// Everything backward needs from one forward step.
template <typename Scalar>
struct LstmStep {
  Matrix<Scalar> x;
  Matrix<Scalar> h_prev;
  Matrix<Scalar> c_prev;
  Matrix<Scalar> gates;  ///< activated i, f, g, o
  Matrix<Scalar> c;
  Matrix<Scalar> tanh_c;
  Matrix<Scalar> h;
};

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
  using S = typename Derived::Scalar;
  return (S(1) + (-z).exp()).inverse();
}

/// Advances `state` by one step on input `x` (input_size x batch). The
/// activated gates are left in `gates`, tanh of the new cell state in `tanh_c`.
template <typename Scalar, typename Derived>
void lstm_step(const LstmLayer<Scalar>& layer, const Eigen::MatrixBase<Derived>& x, LstmState<Scalar>& state,
               Matrix<Scalar>& gates, Matrix<Scalar>* tanh_c = nullptr) {
  const Index hs = layer.hidden_size();
  gates.noalias() = layer.W * x;
  gates.noalias() += layer.U * state.h;
  gates.colwise() += layer.b;
  gates.topRows(2 * hs).array() = sigmoid(gates.topRows(2 * hs).array());
  gates.middleRows(2 * hs, hs).array() = gates.middleRows(2 * hs, hs).array().tanh();
  gates.bottomRows(hs).array() = sigmoid(gates.bottomRows(hs).array());

  state.c = gates.middleRows(hs, hs).cwiseProduct(state.c) + gates.topRows(hs).cwiseProduct(gates.middleRows(2 * hs, hs));
  if (tanh_c) {
    *tanh_c = state.c.array().tanh();
    state.h = gates.bottomRows(hs).cwiseProduct(*tanh_c);
  } else {
    state.h = gates.bottomRows(hs).cwiseProduct(state.c.array().tanh().matrix());
  }
}

/// Runs `layer` over `inputs` starting from `initial`, recording each step.
template <typename Scalar>
std::vector<LstmStep<Scalar>> lstm_forward(const LstmLayer<Scalar>& layer, const std::vector<Matrix<Scalar>>& inputs,
                                           const LstmState<Scalar>& initial) {
  std::vector<LstmStep<Scalar>> steps(inputs.size());
  LstmState<Scalar> state = initial;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    LstmStep<Scalar>& s = steps[t];
    s.x = inputs[t];
    s.h_prev = state.h;
    s.c_prev = state.c;
    lstm_step(layer, inputs[t], state, s.gates, &s.tanh_c);
    s.c = state.c;
    s.h = state.h;
  }
  return steps;
}

/// Backpropagation through time for one layer.
///
/// `dh_out[t]` is dLoss/dh_t arriving from outside the recurrence (an empty
/// matrix stands for zero). Parameter gradients are accumulated into `grad`.
/// If `dx` is non-null it receives dLoss/dx_t; `d_initial` receives the
/// gradient with respect to the initial state.
template <typename Scalar>
void lstm_backward(const LstmLayer<Scalar>& layer, const std::vector<LstmStep<Scalar>>& steps,
                   const std::vector<Matrix<Scalar>>& dh_out, LstmLayer<Scalar>& grad,
                   std::vector<Matrix<Scalar>>* dx, LstmState<Scalar>& d_initial) {
  const Index hs = layer.hidden_size();
  const Index batch = steps.empty() ? 0 : steps.front().h.cols();
  Matrix<Scalar> dh_next = Matrix<Scalar>::Zero(hs, batch);
  Matrix<Scalar> dc_next = Matrix<Scalar>::Zero(hs, batch);
  Matrix<Scalar> dz(4 * hs, batch);
  Matrix<Scalar> dh, dc;
  if (dx) dx->assign(steps.size(), Matrix<Scalar>());

  for (std::size_t k = steps.size(); k-- > 0;) {
    const LstmStep<Scalar>& s = steps[k];
    const auto i = s.gates.topRows(hs).array();
    const auto f = s.gates.middleRows(hs, hs).array();
    const auto g = s.gates.middleRows(2 * hs, hs).array();
    const auto o = s.gates.bottomRows(hs).array();

    dh = dh_next;
    if (dh_out[k].size() > 0) dh += dh_out[k];
    dc = (dh.array() * o * (Scalar(1) - s.tanh_c.array().square())).matrix() + dc_next;

    dz.topRows(hs) = (dc.array() * g * i * (Scalar(1) - i)).matrix();
    dz.middleRows(hs, hs) = (dc.array() * s.c_prev.array() * f * (Scalar(1) - f)).matrix();
    dz.middleRows(2 * hs, hs) = (dc.array() * i * (Scalar(1) - g.square())).matrix();
    dz.bottomRows(hs) = (dh.array() * s.tanh_c.array() * o * (Scalar(1) - o)).matrix();

    grad.W.noalias() += dz * s.x.transpose();
    grad.U.noalias() += dz * s.h_prev.transpose();
    grad.b.noalias() += dz.rowwise().sum();

    if (dx) (*dx)[k].noalias() = layer.W.transpose() * dz;
    dh_next.noalias() = layer.U.transpose() * dz;
    dc_next = (dc.array() * f).matrix();
  }
  d_initial.h = dh_next;
  d_initial.c = dc_next;
}

}  // namespace hivead::nn
