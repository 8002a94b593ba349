#pragma once

#include <Eigen/Core>

namespace opscore {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Joint order everywhere: swing, boom, stick, bucket.
using JointVector = Eigen::Vector4d;

// Order: poles_touched, poles_fell, env_collision, balls_knocked, equipment_collision.
using InfractionCounts = Eigen::Matrix<int, 5, 1>;

inline constexpr int kNumJoints = 4;
inline constexpr int kNumInfractionTypes = 5;
inline constexpr int kObservationSize = 19;
inline constexpr int kNumDynamicFeatures = 3;

}  // namespace opscore
