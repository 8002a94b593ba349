#pragma once

#include <cstdint>

#include "opscore/sim/types.hpp"

namespace opscore::sim {

// Immutable excavator plant for one (config, scenario) pair. The start pose is
// solved once at construction; reset/step are pure, so one instance may be
// shared read-only between threads.
class Simulator {
 public:
  // InvalidScenario on bad config/scenario, UnreachableStart if the start
  // bucket position cannot be reached within 1e-3 m.
  Simulator(ExcavatorConfig config, WorldScenario scenario);

  SimState reset(std::uint64_t seed) const;

  // First-order actuator lag toward setpoint * max_speed, Euler integration,
  // clamping at joint limits (velocity zeroed there), then telemetry and
  // infraction updates. SteppedAfterDone if the episode already ended.
  SimState step(const SimState& state, const Action& action) const;

  const ExcavatorConfig& config() const { return config_; }
  const WorldScenario& scenario() const { return scenario_; }
  const JointVector& start_pose() const { return start_pose_; }

  // Initial bucket-to-goal distance.
  double initial_goal_distance() const;

 private:
  ExcavatorConfig config_;
  WorldScenario scenario_;
  JointVector start_pose_ = JointVector::Zero();
};

// 4 x 3-d link points (swing pivot, boom tip, stick tip, bucket tip), 4 joint
// angular velocities, and the speeds of the boom, stick and bucket tips from
// finite differences of consecutive points.
Observation build_observation(const SimState& state, const ExcavatorConfig& config);

}  // namespace opscore::sim
