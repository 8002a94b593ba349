#include "opscore/sim/engine.hpp"

#include <algorithm>
#include <cmath>

#include "opscore/sim/kinematics.hpp"

namespace opscore::sim {
namespace {

double horizontal_distance(const Vec3& a, const Vec3& b) { return (a - b).head<2>().norm(); }

double clamp_pct(double v) { return std::clamp(v, 0.0, 100.0); }

}  // namespace

JointVector joint_loads(const JointVector& joint_angles, const ExcavatorConfig& config) {
  const KinematicPoints pts = forward_kinematics(joint_angles, config);
  const double total = config.total_reach();
  const JointVector arms(horizontal_distance(pts.bucket_tip, pts.swing_pivot),
                         horizontal_distance(pts.bucket_tip, pts.swing_pivot),
                         horizontal_distance(pts.bucket_tip, pts.boom_tip),
                         horizontal_distance(pts.bucket_tip, pts.stick_tip));
  const EngineCalibration& cal = config.engine;
  return cal.base_load + cal.moment_gain.cwiseProduct(arms / total);
}

EngineTelemetry engine_model(const JointVector& joint_velocities, const JointVector& loads,
                             const ExcavatorConfig& config) {
  const EngineCalibration& cal = config.engine;
  const JointVector speed = joint_velocities.cwiseAbs();
  const double speed_norm = std::min(1.0, speed.sum() / config.max_joint_speed.sum());

  EngineTelemetry out;
  out.torque_pct = clamp_pct(cal.idle_torque + cal.torque_weights.cwiseProduct(speed).dot(loads.cwiseAbs()));
  out.power_pct = clamp_pct(cal.power_gain * out.torque_pct * std::pow(speed_norm, cal.power_speed_exponent));
  out.fuel_pct = clamp_pct(cal.idle_fuel + cal.fuel_gain * out.power_pct);
  return out;
}

}  // namespace opscore::sim
