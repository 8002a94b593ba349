#pragma once

#include <random>

#include "opscore/nn/tensor.hpp"

namespace opscore::nn {

// Standard LSTM cell. Gate rows of `weights`/`bias` are stacked as
// [input; forget; candidate; output], each block hidden x (input + hidden),
// acting on the concatenation [x; h].
template <typename Scalar = double>
struct LstmCell {
  Matrix<Scalar> weights;
  Vector<Scalar> bias;

  LstmCell() = default;
  LstmCell(Eigen::Index input_size, Eigen::Index hidden_size)
      : weights(Matrix<Scalar>::Zero(4 * hidden_size, input_size + hidden_size)),
        bias(Vector<Scalar>::Zero(4 * hidden_size)) {}

  Eigen::Index hidden_size() const { return bias.size() / 4; }
  Eigen::Index input_size() const { return weights.cols() - hidden_size(); }

  ParamBlocks<Scalar> parameter_blocks() { return {block_of<Scalar>(weights), block_of<Scalar>(bias)}; }

  // uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) with the forget-gate bias at +1.
  template <typename Rng>
  void initialize(Rng& rng) {
    const Scalar bound = Scalar(1) / std::sqrt(Scalar(weights.cols()));
    std::uniform_real_distribution<Scalar> u(-bound, bound);
    for (Eigen::Index i = 0; i < weights.size(); ++i) weights.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < bias.size(); ++i) bias(i) = u(rng);
    bias.segment(hidden_size(), hidden_size()).setConstant(Scalar(1));
  }
};

template <typename Scalar>
struct LstmState {
  Matrix<Scalar> h;
  Matrix<Scalar> c;

  static LstmState zeros(Eigen::Index hidden, Eigen::Index batch) {
    return {Matrix<Scalar>::Zero(hidden, batch), Matrix<Scalar>::Zero(hidden, batch)};
  }
};

template <typename Scalar>
struct LstmCache {
  Matrix<Scalar> xh;  // [x; h_prev]
  Matrix<Scalar> c_prev;
  Matrix<Scalar> i, f, g, o;
  Matrix<Scalar> tanh_c;
};

template <typename Scalar>
struct LstmGrads {
  Matrix<Scalar> dx;
  Matrix<Scalar> dh_prev;
  Matrix<Scalar> dc_prev;
};

namespace detail {
template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  return 1 / (1 + (-x).exp());
}
}  // namespace detail

template <typename Scalar, typename Derived>
LstmState<Scalar> lstm_step(const LstmCell<Scalar>& cell, const Eigen::MatrixBase<Derived>& x,
                            const LstmState<Scalar>& state, LstmCache<Scalar>* cache = nullptr) {
  const Eigen::Index H = cell.hidden_size();
  const Eigen::Index B = x.cols();
  check_rows(x.rows(), cell.input_size(), "lstm input");
  check_rows(state.h.rows(), H, "lstm hidden state");
  check_rows(state.c.rows(), H, "lstm cell state");

  Matrix<Scalar> xh(x.rows() + H, B);
  xh << x, state.h;
  Matrix<Scalar> pre = cell.weights * xh;
  pre.colwise() += cell.bias;

  Matrix<Scalar> i = detail::sigmoid(pre.topRows(H).array()).matrix();
  Matrix<Scalar> f = detail::sigmoid(pre.middleRows(H, H).array()).matrix();
  Matrix<Scalar> g = pre.middleRows(2 * H, H).array().tanh().matrix();
  Matrix<Scalar> o = detail::sigmoid(pre.bottomRows(H).array()).matrix();

  LstmState<Scalar> next;
  next.c = (f.array() * state.c.array() + i.array() * g.array()).matrix();
  Matrix<Scalar> tanh_c = next.c.array().tanh().matrix();
  next.h = (o.array() * tanh_c.array()).matrix();

  if (cache) {
    cache->xh = std::move(xh);
    cache->c_prev = state.c;
    cache->i = std::move(i);
    cache->f = std::move(f);
    cache->g = std::move(g);
    cache->o = std::move(o);
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

// Backpropagates d loss / d h' and d loss / d c' through one step,
// accumulating parameter gradients into `grad`.
template <typename Scalar>
LstmGrads<Scalar> lstm_step_backward(const LstmCell<Scalar>& cell, const LstmCache<Scalar>& cache,
                                     const Matrix<Scalar>& dh, const Matrix<Scalar>& dc_in, LstmCell<Scalar>& grad) {
  const Eigen::Index H = cell.hidden_size();
  const Eigen::Index I = cell.input_size();
  const auto& i = cache.i.array();
  const auto& f = cache.f.array();
  const auto& g = cache.g.array();
  const auto& o = cache.o.array();
  const auto& tc = cache.tanh_c.array();

  const Matrix<Scalar> dc = (dc_in.array() + dh.array() * o * (1 - tc.square())).matrix();

  Matrix<Scalar> d_pre(4 * H, dh.cols());
  d_pre.topRows(H) = (dc.array() * g * i * (1 - i)).matrix();
  d_pre.middleRows(H, H) = (dc.array() * cache.c_prev.array() * f * (1 - f)).matrix();
  d_pre.middleRows(2 * H, H) = (dc.array() * i * (1 - g.square())).matrix();
  d_pre.bottomRows(H) = (dh.array() * tc * o * (1 - o)).matrix();

  grad.weights.noalias() += d_pre * cache.xh.transpose();
  grad.bias.noalias() += d_pre.rowwise().sum();

  const Matrix<Scalar> dxh = cell.weights.transpose() * d_pre;
  LstmGrads<Scalar> out;
  out.dx = dxh.topRows(I);
  out.dh_prev = dxh.bottomRows(H);
  out.dc_prev = (dc.array() * f).matrix();
  return out;
}

}  // namespace opscore::nn
