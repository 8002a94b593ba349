#pragma once

#include "opscore/sim/types.hpp"

namespace opscore::sim {

// Dimensionless per-joint load from the arm's horizontal moment arms.
JointVector joint_loads(const JointVector& joint_angles, const ExcavatorConfig& config);

// Monotone engine surrogate:
//   torque = clamp(idle_torque + sum_i w_i |w_i| load_i, 0, 100)
//   power  = clamp(power_gain * torque * speed_norm^power_speed_exponent, 0, 100)
//   fuel   = clamp(idle_fuel + fuel_gain * power, 0, 100)
// speed_norm = sum |w_i| / sum max_speed_i, capped at 1. Loads are taken as
// non-negative magnitudes.
EngineTelemetry engine_model(const JointVector& joint_velocities, const JointVector& joint_loads,
                             const ExcavatorConfig& config);

}  // namespace opscore::sim
