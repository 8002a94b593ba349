#pragma once

#include "opscore/nn/tensor.hpp"

namespace opscore::nn {

// z = mu + exp(logvar / 2) * noise, elementwise.
template <typename Scalar, typename A, typename B, typename C>
Matrix<Scalar> reparam_sample(const Eigen::MatrixBase<A>& mu, const Eigen::MatrixBase<B>& logvar,
                              const Eigen::MatrixBase<C>& noise) {
  if (mu.rows() != logvar.rows() || mu.cols() != logvar.cols() || mu.rows() != noise.rows() ||
      mu.cols() != noise.cols())
    fail(ErrorCode::ShapeMismatch, "reparam_sample: mu, logvar and noise must share a shape");
  return (mu.array() + (Scalar(0.5) * logvar.array()).exp() * noise.array()).matrix();
}

template <typename Scalar>
struct ReparamGrads {
  Matrix<Scalar> d_mu;
  Matrix<Scalar> d_logvar;
};

template <typename Scalar>
ReparamGrads<Scalar> reparam_backward(const Matrix<Scalar>& logvar, const Matrix<Scalar>& noise,
                                      const Matrix<Scalar>& d_z) {
  return {d_z, (d_z.array() * noise.array() * Scalar(0.5) * (Scalar(0.5) * logvar.array()).exp()).matrix()};
}

}  // namespace opscore::nn
