#pragma once

#include <cmath>
#include <random>

#include "opscore/nn/tensor.hpp"

namespace opscore::nn {

enum class Activation { identity, elu, tanh };

// ELU with alpha = 1: x for x > 0, exp(x) - 1 otherwise.
template <typename Derived>
auto elu(const Eigen::ArrayBase<Derived>& x) {
  return (x > 0).select(x, x.exp() - 1);
}

template <typename Scalar>
Matrix<Scalar> activate(Activation act, const Matrix<Scalar>& pre) {
  switch (act) {
    case Activation::elu: return elu(pre.array()).matrix();
    case Activation::tanh: return pre.array().tanh().matrix();
    case Activation::identity: break;
  }
  return pre;
}

// d act / d pre, evaluated elementwise from the pre-activation and output.
template <typename Scalar>
Matrix<Scalar> activation_slope(Activation act, const Matrix<Scalar>& pre, const Matrix<Scalar>& out) {
  switch (act) {
    case Activation::elu: return (pre.array() > 0).select(Matrix<Scalar>::Ones(pre.rows(), pre.cols()).array(), out.array() + 1).matrix();
    case Activation::tanh: return (1 - out.array().square()).matrix();
    case Activation::identity: break;
  }
  return Matrix<Scalar>::Ones(pre.rows(), pre.cols());
}

template <typename Scalar = double>
struct Dense {
  Matrix<Scalar> weights;  // out x in
  Vector<Scalar> bias;     // out
  Activation activation = Activation::identity;

  Dense() = default;
  Dense(Eigen::Index in, Eigen::Index out, Activation act)
      : weights(Matrix<Scalar>::Zero(out, in)), bias(Vector<Scalar>::Zero(out)), activation(act) {}

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }

  ParamBlocks<Scalar> parameter_blocks() { return {block_of<Scalar>(weights), block_of<Scalar>(bias)}; }

  // uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and bias.
  template <typename Rng>
  void initialize(Rng& rng) {
    const Scalar bound = Scalar(1) / std::sqrt(Scalar(in_dim()));
    std::uniform_real_distribution<Scalar> u(-bound, bound);
    for (Eigen::Index i = 0; i < weights.size(); ++i) weights.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < bias.size(); ++i) bias(i) = u(rng);
  }
};

template <typename Scalar>
struct DenseCache {
  Matrix<Scalar> input;
  Matrix<Scalar> pre;
  Matrix<Scalar> out;
};

// Columns are samples: x is in x batch, result is out x batch.
template <typename Scalar, typename Derived>
Matrix<Scalar> forward(const Dense<Scalar>& layer, const Eigen::MatrixBase<Derived>& x) {
  check_rows(x.rows(), layer.in_dim(), "dense input");
  Matrix<Scalar> pre = layer.weights * x;
  pre.colwise() += layer.bias;
  return activate(layer.activation, pre);
}

template <typename Scalar, typename Derived>
const Matrix<Scalar>& forward(const Dense<Scalar>& layer, const Eigen::MatrixBase<Derived>& x,
                              DenseCache<Scalar>& cache) {
  check_rows(x.rows(), layer.in_dim(), "dense input");
  cache.input = x;
  cache.pre = layer.weights * cache.input;
  cache.pre.colwise() += layer.bias;
  cache.out = activate(layer.activation, cache.pre);
  return cache.out;
}

// Accumulates parameter gradients into `grad` and returns d loss / d input.
template <typename Scalar, typename Derived>
Matrix<Scalar> backward(const Dense<Scalar>& layer, const DenseCache<Scalar>& cache,
                        const Eigen::MatrixBase<Derived>& d_out, Dense<Scalar>& grad) {
  const Matrix<Scalar> d_pre = (d_out.array() * activation_slope(layer.activation, cache.pre, cache.out).array()).matrix();
  grad.weights.noalias() += d_pre * cache.input.transpose();
  grad.bias.noalias() += d_pre.rowwise().sum();
  return layer.weights.transpose() * d_pre;
}

}  // namespace opscore::nn
