#include "opscore/dataset/controllers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "opscore/common/error.hpp"
#include "opscore/common/rng.hpp"
#include "opscore/sim/kinematics.hpp"

namespace opscore::dataset {

namespace {

double tallest_obstacle(const sim::WorldScenario& w) {
  double top = w.ground_z;
  for (const auto& p : w.poles) top = std::max(top, p.position.z() + p.height);
  return top;
}

double swing_angle_to(const Vec3& point, const sim::ExcavatorConfig& config) {
  const Vec3 d = point - config.base_position;
  return std::atan2(d.y(), d.x());
}

std::array<JointVector, 3> plan_waypoints(const sim::Simulator& sim, double clearance) {
  const auto& config = sim.config();
  const auto& world = sim.scenario();
  const JointVector start = sim.start_pose();
  const Vec3 start_tip = sim::forward_kinematics(start, config).bucket_tip;

  Vec3 lifted = start_tip;
  lifted.z() = tallest_obstacle(world) + clearance;
  const auto lift = sim::solve_bucket_ik(lifted, config, start);

  JointVector over_goal = lift.joint_angles;
  over_goal(0) = swing_angle_to(world.goal, config);
  const auto place = sim::solve_bucket_ik(world.goal, config, over_goal);
  return {lift.joint_angles, over_goal, place.joint_angles};
}

}  // namespace

ControllerParams sample_params(ControllerKind kind, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x5eed));
  ControllerParams p;
  if (kind == ControllerKind::expert) {
    p.gain = 0.8 * uniform(rng, 0.9, 1.1);
    p.clearance = 1.2 + uniform(rng, -0.2, 0.2);
    p.max_setpoint_rate = 0.05;
    return p;
  }
  p.gain = 1.5 * 0.8 * uniform(rng, 0.9, 1.1);
  p.max_setpoint = 1.0;
  p.clearance = uniform(rng, -2.0, -1.0);
  p.switch_tolerance = 0.15;
  p.ou_theta = 0.15;
  p.ou_sigma = 0.3;
  p.pause_probability = 0.02;
  p.pause_min_steps = 5;
  p.pause_max_steps = 15;
  return p;
}

SessionLog run_controller(const ControllerParams& params, ControllerLabel label, const sim::Simulator& sim,
                          std::uint64_t seed, const ScoringWeights& weights) {
  const auto& config = sim.config();
  const auto waypoints = plan_waypoints(sim, params.clearance);
  Rng rng(derive_seed(seed, 0xc0ffee));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SessionLog log;
  log.label = label;
  log.seed = seed;
  log.scenario = sim.scenario().name;

  sim::SimState state = sim.reset(seed);
  JointVector ou = JointVector::Zero();
  JointVector previous = JointVector::Zero();
  std::size_t target = 0;
  int paused = 0;
  while (!state.done) {
    JointVector error = waypoints[target] - state.joint_angles;
    while (target + 1 < waypoints.size() && error.cwiseAbs().maxCoeff() < params.switch_tolerance) {
      ++target;
      error = waypoints[target] - state.joint_angles;
    }
    JointVector setpoint = (params.gain * error).cwiseQuotient(config.max_joint_speed);
    if (params.ou_sigma > 0) {
      for (int j = 0; j < kNumJoints; ++j) ou(j) += -params.ou_theta * ou(j) + params.ou_sigma * normal(rng);
      setpoint += ou;
    }
    if (paused == 0 && params.pause_probability > 0 && unit(rng) < params.pause_probability)
      paused = std::uniform_int_distribution<int>(params.pause_min_steps, params.pause_max_steps)(rng);
    if (paused > 0) {
      --paused;
      setpoint.setZero();
    }
    setpoint = setpoint.cwiseMax(-params.max_setpoint).cwiseMin(params.max_setpoint);
    if (params.max_setpoint_rate > 0)
      setpoint = previous + (setpoint - previous).cwiseMax(-params.max_setpoint_rate).cwiseMin(params.max_setpoint_rate);
    previous = setpoint;
    sim::Action action{setpoint};
    state = sim.step(state, action);
    log.steps.push_back(make_step_record(state, action, config));
  }
  log.goal_reached = state.goal_reached;
  finalize_session(log, weights);
  return log;
}

SessionLog run_scripted_controller(ControllerKind kind, const sim::Simulator& sim, std::uint64_t seed,
                                   const ScoringWeights& weights) {
  const bool expert = kind == ControllerKind::expert;
  SessionLog log = run_controller(sample_params(kind, seed), expert ? ControllerLabel::expert_scripted
                                                                    : ControllerLabel::novice_scripted,
                                  sim, seed, weights);
  if (expert && !log.goal_reached)
    fail(ErrorCode::ControllerDiverged, "expert run with seed " + std::to_string(seed) + " did not reach the goal");
  return log;
}

}  // namespace opscore::dataset
