#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner. None of them call the code under test.

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

#include "opscore/common/types.hpp"
#include "opscore/sim/types.hpp"

namespace opscore::oracle {

// Bucket tip by composing homogeneous transforms link by link.
inline Vec3 transform_chain_bucket_tip(const JointVector& q, const sim::ExcavatorConfig& c) {
  auto translate = [](double x, double y, double z) {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    T.block<3, 1>(0, 3) = Vec3(x, y, z);
    return T;
  };
  auto rot = [](const Eigen::Matrix3d& R) {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    T.block<3, 3>(0, 0) = R;
    return T;
  };
  auto rz = [&](double a) { return rot(Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix()); };
  // Pitch up by a: rotation about -y.
  auto pitch = [&](double a) { return rot(Eigen::AngleAxisd(-a, Vec3::UnitY()).toRotationMatrix()); };

  const Eigen::Matrix4d T = translate(c.base_position.x(), c.base_position.y(), c.base_position.z()) *
                            translate(0, 0, c.cab_height) * rz(q(0)) * pitch(q(1)) *
                            translate(c.boom_length, 0, 0) * pitch(q(2)) * translate(c.stick_length, 0, 0) *
                            pitch(q(3)) * translate(c.bucket_length, 0, 0);
  return T.block<3, 1>(0, 3);
}

// Per-dimension Simpson quadrature of  q(x) ln(q(x) / p(x)),  q = N(mu, exp(logvar)), p = N(0, 1).
inline double kl_quadrature(double mu, double logvar) {
  const double sigma = std::exp(0.5 * logvar);
  const double lo = mu - 14.0 * sigma, hi = mu + 14.0 * sigma;
  const int n = 20000;
  const double h = (hi - lo) / n;
  auto f = [&](double x) {
    const double zq = (x - mu) / sigma;
    const double log_q = -0.5 * zq * zq - std::log(sigma) - 0.5 * std::log(2 * std::numbers::pi);
    const double log_p = -0.5 * x * x - 0.5 * std::log(2 * std::numbers::pi);
    return std::exp(log_q) * (log_q - log_p);
  };
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return acc * h / 3.0;
}

}  // namespace opscore::oracle
