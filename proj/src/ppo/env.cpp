#include "opscore/ppo/env.hpp"

namespace opscore::ppo {

ManeuverEnv::ManeuverEnv(const sim::Simulator& sim, const reward::DynamicModel* dynamic,
                         const reward::SafetyModel* safety, reward::RewardMask mask)
    : sim_(&sim),
      mask_(mask),
      scorer_(dynamic, safety, sim.scenario().goal, sim.initial_goal_distance()),
      state_(sim.reset(0)) {
  if (mask.empty()) fail(ErrorCode::EmptyMask, "at least one reward head must be enabled");
}

sim::Observation ManeuverEnv::reset(std::uint64_t seed) {
  state_ = sim_->reset(seed);
  scorer_.reset();
  return sim::build_observation(state_, sim_->config());
}

ManeuverEnv::Step ManeuverEnv::step(const JointVector& action) {
  state_ = sim_->step(state_, sim::Action{action});
  const auto scored = scorer_.score(state_.engine.as_vector(), state_.infractions_step, state_.bucket_tip());
  Step out;
  out.observation = sim::build_observation(state_, sim_->config());
  out.raw = scored.raw;
  out.reward = reward::assemble_reward(scored.raw.r_g, scored.raw.r_d, scored.raw.r_s, mask_);
  out.done = state_.done;
  out.goal_reached = state_.goal_reached;
  return out;
}

double ManeuverEnv::goal_distance() const { return (sim_->scenario().goal - state_.bucket_tip()).norm(); }

}  // namespace opscore::ppo
