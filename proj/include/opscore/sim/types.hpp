#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "opscore/common/types.hpp"

namespace opscore::sim {

// Calibrated surrogate for engine telemetry. All outputs are percentages.
struct EngineCalibration {
  double idle_torque = 22.0;
  double idle_fuel = 1.5;
  // Per-joint torque contribution per (rad/s x load).
  Vec4 torque_weights{19.6, 36.4, 28.0, 11.2};
  // Joint load = base_load + moment_gain * (horizontal moment arm / total arm length).
  Vec4 base_load{0.8, 0.9, 0.7, 0.5};
  Vec4 moment_gain{0.6, 0.9, 0.6, 0.3};
  double power_gain = 1.5;
  double power_speed_exponent = 0.5;
  double fuel_gain = 0.17;
};

struct ExcavatorConfig {
  double boom_length = 5.7;
  double stick_length = 2.9;
  double bucket_length = 1.5;
  JointVector joint_min{-3.14159265358979, -0.9, -2.8, -2.6};
  JointVector joint_max{3.14159265358979, 1.2, 0.4, 1.2};
  JointVector max_joint_speed{0.45, 0.30, 0.40, 0.60};
  double actuator_lag_tau = 0.3;
  Vec3 base_position{-8.6147, -150.6389, 0.0};
  double cab_height = 2.0;
  double dt = 0.1;
  int max_steps = 280;
  double goal_tolerance = 0.5;
  // Equipment-collision zone: vertical cylinder around the base axis.
  double cab_exclusion_radius = 2.0;
  double cab_exclusion_top = 3.5;
  EngineCalibration engine;

  double total_reach() const { return boom_length + stick_length + bucket_length; }
  // InvalidScenario on violated invariants.
  void validate() const;
};

enum class PoleState { upright, touched, fallen };

// Vertical cylinder standing on `position` (its base point) up to position.z + height.
struct Pole {
  Vec3 position = Vec3::Zero();
  double radius = 0.4;
  double height = 3.0;
  double topple_speed_threshold = 1.0;
};

struct Ball {
  Vec3 position = Vec3::Zero();
  double radius = 0.4;
};

struct AxisBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  bool contains(const Vec3& p) const { return (p.array() >= min.array()).all() && (p.array() <= max.array()).all(); }
};

struct WorldScenario {
  std::string name = "reference";
  std::vector<Pole> poles;
  std::vector<Ball> balls;
  double ground_z = 0.0;
  AxisBox workspace_bounds;
  Vec3 goal = Vec3::Zero();
  Vec3 start_bucket = Vec3::Zero();

  void validate() const;
};

struct Action {
  JointVector setpoints = JointVector::Zero();

  static Action zero() { return {}; }
  bool valid() const;
};

struct EngineTelemetry {
  double torque_pct = 0.0;
  double power_pct = 0.0;
  double fuel_pct = 0.0;

  Vec3 as_vector() const { return {torque_pct, power_pct, fuel_pct}; }
};

struct KinematicPoints {
  Vec3 swing_pivot = Vec3::Zero();
  Vec3 boom_tip = Vec3::Zero();
  Vec3 stick_tip = Vec3::Zero();
  Vec3 bucket_tip = Vec3::Zero();
};

// Latched world state used for event counting.
struct WorldFlags {
  std::vector<PoleState> poles;
  std::vector<bool> pole_contact;
  std::vector<bool> balls_knocked;
  bool env_contact = false;
  bool equipment_contact = false;

  bool operator==(const WorldFlags&) const = default;
};

struct SimState {
  int t = 0;
  std::uint64_t seed = 0;
  JointVector joint_angles = JointVector::Zero();
  JointVector joint_velocities = JointVector::Zero();
  EngineTelemetry engine;
  InfractionCounts infractions_step = InfractionCounts::Zero();
  InfractionCounts infractions_total = InfractionCounts::Zero();
  KinematicPoints points;
  // Points at the previous step; equal to `points` right after reset.
  KinematicPoints previous_points;
  WorldFlags world;
  bool goal_reached = false;
  bool done = false;

  const Vec3& bucket_tip() const { return points.bucket_tip; }
};

using Observation = Eigen::Matrix<double, kObservationSize, 1>;

}  // namespace opscore::sim
