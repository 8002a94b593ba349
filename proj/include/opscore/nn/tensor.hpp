#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "opscore/common/error.hpp"

namespace opscore::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Flat views over a model's parameter arrays, in a fixed order. A gradient
// tape for a model is simply another instance of the same model type; blocks
// of the two line up one-to-one.
template <typename Scalar>
using ParamBlocks = std::vector<std::span<Scalar>>;

template <typename Scalar, typename Derived>
std::span<Scalar> block_of(Eigen::PlainObjectBase<Derived>& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

template <typename Model>
void zero_grad(Model& tape) {
  for (auto block : tape.parameter_blocks())
    for (auto& v : block) v = 0;
}

template <typename Model>
Model zeros_like(const Model& model) {
  Model out = model;
  zero_grad(out);
  return out;
}

template <typename Model>
std::size_t parameter_count(Model& model) {
  std::size_t n = 0;
  for (auto block : model.parameter_blocks()) n += block.size();
  return n;
}

template <typename Model>
bool all_finite(Model& model) {
  for (auto block : model.parameter_blocks())
    for (auto v : block)
      if (!std::isfinite(v)) return false;
  return true;
}

// Adds `scale * source` into `target` block by block.
template <typename Model, typename Scalar>
void accumulate(Model& target, Model& source, Scalar scale) {
  auto t = target.parameter_blocks();
  auto s = source.parameter_blocks();
  for (std::size_t b = 0; b < t.size(); ++b)
    for (std::size_t i = 0; i < t[b].size(); ++i) t[b][i] += scale * s[b][i];
}

inline void check_rows(Eigen::Index got, Eigen::Index expected, const char* what) {
  if (got != expected)
    fail(ErrorCode::ShapeMismatch,
         std::string(what) + ": expected " + std::to_string(expected) + " rows, got " + std::to_string(got));
}

}  // namespace opscore::nn
