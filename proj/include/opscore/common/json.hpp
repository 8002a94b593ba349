#pragma once

#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "opscore/common/error.hpp"

namespace opscore {

using Json = nlohmann::json;

template <typename Derived>
Json to_json_array(const Eigen::DenseBase<Derived>& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// Reads a fixed-length numeric array into an Eigen vector; ParseError on mismatch.
template <typename VectorType>
VectorType json_vector(const Json& j, const std::string& what) {
  if (!j.is_array()) fail(ErrorCode::ParseError, what + ": expected array");
  VectorType out;
  if constexpr (VectorType::SizeAtCompileTime == Eigen::Dynamic) {
    out.resize(static_cast<Eigen::Index>(j.size()));
  } else if (static_cast<Eigen::Index>(j.size()) != VectorType::SizeAtCompileTime) {
    fail(ErrorCode::ParseError,
         what + ": expected " + std::to_string(VectorType::SizeAtCompileTime) + " entries, got " +
             std::to_string(j.size()));
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(ErrorCode::ParseError, what + ": non-numeric entry");
    out(static_cast<Eigen::Index>(i)) = j[i].get<typename VectorType::Scalar>();
  }
  return out;
}

}  // namespace opscore
