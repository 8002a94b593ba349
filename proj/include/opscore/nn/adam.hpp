#pragma once

#include <cmath>

#include "opscore/nn/tensor.hpp"

namespace opscore::nn {

template <typename Scalar = double>
struct AdamState {
  Scalar lr = Scalar(1e-4);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);
  long step = 0;
  std::vector<Vector<Scalar>> first_moment;
  std::vector<Vector<Scalar>> second_moment;

  explicit AdamState(Scalar learning_rate = Scalar(1e-4)) : lr(learning_rate) {}
};

// One bias-corrected Adam step over every parameter block. Rejects the whole
// update (nothing modified) if any gradient entry is non-finite.
template <typename Model, typename Scalar>
void adam_update(Model& params, Model& grads, AdamState<Scalar>& state) {
  auto p = params.parameter_blocks();
  auto g = grads.parameter_blocks();
  if (p.size() != g.size()) fail(ErrorCode::ShapeMismatch, "adam: parameter/gradient block count differs");
  for (std::size_t b = 0; b < g.size(); ++b) {
    if (p[b].size() != g[b].size()) fail(ErrorCode::ShapeMismatch, "adam: block size differs");
    for (Scalar v : g[b])
      if (!std::isfinite(v)) fail(ErrorCode::NonFiniteGradient, "adam: non-finite gradient entry");
  }
  if (state.first_moment.empty()) {
    for (const auto& block : p) {
      state.first_moment.push_back(Vector<Scalar>::Zero(static_cast<Eigen::Index>(block.size())));
      state.second_moment.push_back(Vector<Scalar>::Zero(static_cast<Eigen::Index>(block.size())));
    }
  }
  if (state.first_moment.size() != p.size()) fail(ErrorCode::ShapeMismatch, "adam: state does not match model");

  ++state.step;
  const Scalar correction1 = 1 - std::pow(state.beta1, Scalar(state.step));
  const Scalar correction2 = 1 - std::pow(state.beta2, Scalar(state.step));
  for (std::size_t b = 0; b < p.size(); ++b) {
    Eigen::Map<Vector<Scalar>> theta(p[b].data(), static_cast<Eigen::Index>(p[b].size()));
    Eigen::Map<const Vector<Scalar>> grad(g[b].data(), static_cast<Eigen::Index>(g[b].size()));
    auto& m = state.first_moment[b];
    auto& v = state.second_moment[b];
    m = state.beta1 * m + (1 - state.beta1) * grad;
    v = state.beta2 * v + (1 - state.beta2) * grad.cwiseAbs2();
    theta.array() -= state.lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + state.eps);
  }
}

}  // namespace opscore::nn
