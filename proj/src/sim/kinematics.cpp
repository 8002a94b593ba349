#include "opscore/sim/kinematics.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace opscore::sim {
namespace {

struct PlanarChain {
  double reach = 0.0;   // horizontal distance of bucket tip from the swing axis
  double height = 0.0;  // bucket tip height above the swing pivot
};

Eigen::Matrix<double, 3, 4> bucket_jacobian(const JointVector& q, const ExcavatorConfig& c) {
  const double p1 = q(1), p2 = q(1) + q(2), p3 = q(1) + q(2) + q(3);
  const double s1 = std::sin(p1), s2 = std::sin(p2), s3 = std::sin(p3);
  const double c1 = std::cos(p1), c2 = std::cos(p2), c3 = std::cos(p3);
  const double L1 = c.boom_length, L2 = c.stick_length, L3 = c.bucket_length;
  const double reach = L1 * c1 + L2 * c2 + L3 * c3;
  const Vec3 u(std::cos(q(0)), std::sin(q(0)), 0.0);
  const Vec3 du(-std::sin(q(0)), std::cos(q(0)), 0.0);
  const Vec3 ez = Vec3::UnitZ();

  Eigen::Matrix<double, 3, 4> J;
  J.col(0) = reach * du;
  J.col(1) = -(L1 * s1 + L2 * s2 + L3 * s3) * u + reach * ez;
  J.col(2) = -(L2 * s2 + L3 * s3) * u + (L2 * c2 + L3 * c3) * ez;
  J.col(3) = -(L3 * s3) * u + (L3 * c3) * ez;
  return J;
}

JointVector clamp_to_limits(const JointVector& q, const ExcavatorConfig& c) {
  return q.cwiseMax(c.joint_min).cwiseMin(c.joint_max);
}

}  // namespace

KinematicPoints forward_kinematics(const JointVector& q, const ExcavatorConfig& config) {
  const Vec3 pivot = config.base_position + Vec3(0.0, 0.0, config.cab_height);
  const Vec3 u(std::cos(q(0)), std::sin(q(0)), 0.0);
  const Vec3 ez = Vec3::UnitZ();

  const double p1 = q(1);
  const double p2 = p1 + q(2);
  const double p3 = p2 + q(3);

  KinematicPoints pts;
  pts.swing_pivot = pivot;
  pts.boom_tip = pivot + config.boom_length * (std::cos(p1) * u + std::sin(p1) * ez);
  pts.stick_tip = pts.boom_tip + config.stick_length * (std::cos(p2) * u + std::sin(p2) * ez);
  pts.bucket_tip = pts.stick_tip + config.bucket_length * (std::cos(p3) * u + std::sin(p3) * ez);
  return pts;
}

IkResult solve_bucket_ik(const Vec3& target, const ExcavatorConfig& config, const JointVector& seed,
                         double tolerance, int max_iterations) {
  constexpr double kDamping = 0.05;
  IkResult result;
  JointVector q = clamp_to_limits(seed, config);
  for (int it = 0; it <= max_iterations; ++it) {
    const Vec3 error = target - forward_kinematics(q, config).bucket_tip;
    result.residual = error.norm();
    result.iterations = it;
    if (result.residual < tolerance) {
      result.converged = true;
      break;
    }
    if (it == max_iterations) break;
    const auto J = bucket_jacobian(q, config);
    const Eigen::Matrix3d JJt = J * J.transpose() + kDamping * kDamping * Eigen::Matrix3d::Identity();
    const JointVector dq = J.transpose() * JJt.ldlt().solve(error);
    q = clamp_to_limits(q + dq, config);
  }
  result.joint_angles = q;
  return result;
}

IkResult solve_bucket_ik(const Vec3& target, const ExcavatorConfig& config, double tolerance) {
  IkResult at_zero = solve_bucket_ik(target, config, JointVector::Zero(), tolerance, 0);
  if (at_zero.converged) return at_zero;

  const Vec3 offset = target - config.base_position;
  const JointVector nominal(std::atan2(offset.y(), offset.x()), 0.5, -1.3, -0.9);
  IkResult from_nominal = solve_bucket_ik(target, config, nominal, tolerance);
  if (from_nominal.converged) return from_nominal;
  IkResult from_zero = solve_bucket_ik(target, config, JointVector::Zero(), tolerance);
  return from_zero.residual < from_nominal.residual ? from_zero : from_nominal;
}

}  // namespace opscore::sim
