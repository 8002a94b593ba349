#pragma once

#include <algorithm>
#include <cmath>

#include "opscore/nn/tensor.hpp"

namespace opscore::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t parameters_checked = 0;
  std::size_t worst_index = 0;
};

// Compares the analytic gradient against central differences
// (L(theta + h) - L(theta - h)) / 2h for every parameter of `model`.
// `loss(model, grad)` returns the scalar loss and, when `grad` is non-null,
// accumulates the analytic gradient into it. The relative error of each entry
// is |a - n| / max(|a|, |n|, 1e-6 * max(1, |L|)); the floor tracks the
// cancellation noise of the central difference, which grows with |L|.
template <typename Model, typename LossFn>
GradCheckResult grad_check(Model& model, LossFn&& loss, double h = 1e-5) {
  Model analytic = zeros_like(model);
  const double base = std::abs(static_cast<double>(loss(model, &analytic)));
  const double floor = 1e-6 * std::max(1.0, base);

  GradCheckResult result;
  auto params = model.parameter_blocks();
  auto grads = analytic.parameter_blocks();
  std::size_t flat = 0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t i = 0; i < params[b].size(); ++i, ++flat) {
      auto& theta = params[b][i];
      const auto saved = theta;
      theta = saved + h;
      const double up = static_cast<double>(loss(model, static_cast<Model*>(nullptr)));
      theta = saved - h;
      const double down = static_cast<double>(loss(model, static_cast<Model*>(nullptr)));
      theta = saved;

      const double numeric = (up - down) / (2.0 * h);
      const double exact = static_cast<double>(grads[b][i]);
      const double denom = std::max({std::abs(exact), std::abs(numeric), floor});
      const double rel = std::abs(exact - numeric) / denom;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_index = flat;
      }
    }
  }
  result.parameters_checked = flat;
  return result;
}

}  // namespace opscore::nn
