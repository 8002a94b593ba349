#pragma once

#include "opscore/sim/types.hpp"

namespace opscore::sim {

// Planar boom/stick/bucket chain in a vertical plane, rotated about the base
// z-axis by the swing angle and rooted at base_position + (0, 0, cab_height).
// Boom, stick and bucket angles accumulate: each link's elevation is the sum
// of its own and all upstream pitch angles.
KinematicPoints forward_kinematics(const JointVector& joint_angles, const ExcavatorConfig& config);

struct IkResult {
  JointVector joint_angles = JointVector::Zero();
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Damped-least-squares position IK for the bucket tip, joint limits enforced
// by projection after every iteration.
IkResult solve_bucket_ik(const Vec3& target, const ExcavatorConfig& config, const JointVector& seed,
                         double tolerance = 1e-6, int max_iterations = 500);

// Returns the zero pose if it already hits the target, otherwise iterates
// from a nominal working pose (falling back to the zero pose).
IkResult solve_bucket_ik(const Vec3& target, const ExcavatorConfig& config, double tolerance = 1e-6);

}  // namespace opscore::sim
