#include "opscore/sim/simulator.hpp"

#include <cmath>
#include <utility>

#include "opscore/common/error.hpp"
#include "opscore/sim/engine.hpp"
#include "opscore/sim/infractions.hpp"
#include "opscore/sim/kinematics.hpp"

namespace opscore::sim {

namespace {
constexpr double kStartTolerance = 1e-3;
}

void ExcavatorConfig::validate() const {
  require(boom_length > 0 && stick_length > 0 && bucket_length > 0, ErrorCode::InvalidScenario,
          "link lengths must be positive");
  require((joint_min.array() < joint_max.array()).all(), ErrorCode::InvalidScenario,
          "joint limits must satisfy min < max");
  require((max_joint_speed.array() > 0).all(), ErrorCode::InvalidScenario, "max joint speeds must be positive");
  require(dt > 0, ErrorCode::InvalidScenario, "dt must be positive");
  require(actuator_lag_tau > 0, ErrorCode::InvalidScenario, "actuator lag must be positive");
  require(cab_height >= 0, ErrorCode::InvalidScenario, "cab height must be non-negative");
  require(max_steps > 0, ErrorCode::InvalidScenario, "max_steps must be positive");
  require(goal_tolerance > 0, ErrorCode::InvalidScenario, "goal tolerance must be positive");
}

void WorldScenario::validate() const {
  require((workspace_bounds.min.array() < workspace_bounds.max.array()).all(), ErrorCode::InvalidScenario,
          "workspace bounds are empty");
  require(workspace_bounds.contains(goal), ErrorCode::InvalidScenario, "goal outside workspace bounds");
  require(workspace_bounds.contains(start_bucket), ErrorCode::InvalidScenario, "start outside workspace bounds");
  for (const Pole& p : poles)
    require(p.radius > 0 && p.height > 0 && p.topple_speed_threshold > 0, ErrorCode::InvalidScenario,
            "pole radius, height and topple threshold must be positive");
  for (const Ball& b : balls) require(b.radius > 0, ErrorCode::InvalidScenario, "ball radius must be positive");
}

bool Action::valid() const {
  return setpoints.allFinite() && (setpoints.array().abs() <= 1.0).all();
}

Simulator::Simulator(ExcavatorConfig config, WorldScenario scenario)
    : config_(std::move(config)), scenario_(std::move(scenario)) {
  config_.validate();
  scenario_.validate();
  const IkResult ik = solve_bucket_ik(scenario_.start_bucket, config_);
  if (!ik.converged || ik.residual >= kStartTolerance)
    fail(ErrorCode::UnreachableStart, "IK residual " + std::to_string(ik.residual) + " m");
  start_pose_ = ik.joint_angles;
}

double Simulator::initial_goal_distance() const {
  return (scenario_.goal - forward_kinematics(start_pose_, config_).bucket_tip).norm();
}

SimState Simulator::reset(std::uint64_t seed) const {
  SimState s;
  s.seed = seed;
  s.joint_angles = start_pose_;
  s.points = forward_kinematics(start_pose_, config_);
  s.previous_points = s.points;
  s.engine = engine_model(JointVector::Zero(), joint_loads(start_pose_, config_), config_);
  s.world = initial_world_flags(scenario_);
  return s;
}

SimState Simulator::step(const SimState& state, const Action& action) const {
  if (state.done) fail(ErrorCode::SteppedAfterDone, "step at t=" + std::to_string(state.t));
  if (!action.valid()) fail(ErrorCode::InvalidArgument, "action setpoints must be finite and within [-1, 1]");

  SimState next = state;
  const double blend = 1.0 - std::exp(-config_.dt / config_.actuator_lag_tau);
  const JointVector target = action.setpoints.cwiseProduct(config_.max_joint_speed);
  next.joint_velocities = state.joint_velocities + blend * (target - state.joint_velocities);

  next.joint_angles = state.joint_angles + config_.dt * next.joint_velocities;
  for (int j = 0; j < kNumJoints; ++j) {
    if (next.joint_angles(j) <= config_.joint_min(j)) {
      next.joint_angles(j) = config_.joint_min(j);
      next.joint_velocities(j) = 0.0;
    } else if (next.joint_angles(j) >= config_.joint_max(j)) {
      next.joint_angles(j) = config_.joint_max(j);
      next.joint_velocities(j) = 0.0;
    }
  }

  next.previous_points = state.points;
  next.points = forward_kinematics(next.joint_angles, config_);
  next.engine = engine_model(next.joint_velocities, joint_loads(next.joint_angles, config_), config_);

  InfractionUpdate infractions = detect_infractions(state, next, scenario_, config_);
  next.infractions_step = infractions.counts;
  next.infractions_total = state.infractions_total + infractions.counts;
  next.world = std::move(infractions.flags);

  next.t = state.t + 1;
  next.goal_reached = (next.points.bucket_tip - scenario_.goal).norm() < config_.goal_tolerance;
  next.done = next.goal_reached || next.t >= config_.max_steps;
  return next;
}

Observation build_observation(const SimState& state, const ExcavatorConfig& config) {
  const KinematicPoints& p = state.points;
  const KinematicPoints& q = state.previous_points;
  Observation obs;
  obs << p.swing_pivot, p.boom_tip, p.stick_tip, p.bucket_tip, state.joint_velocities,
      (p.boom_tip - q.boom_tip).norm() / config.dt, (p.stick_tip - q.stick_tip).norm() / config.dt,
      (p.bucket_tip - q.bucket_tip).norm() / config.dt;
  return obs;
}

}  // namespace opscore::sim
