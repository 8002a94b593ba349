#pragma once

#include <cstdint>

#include "opscore/reward/rewards.hpp"
#include "opscore/sim/simulator.hpp"

namespace opscore::ppo {

// The maneuvering task as an episodic environment: observation per
// build_observation, reward per assemble_reward under `mask`. Reward models
// may be supplied for reporting even when their head is masked out.
class ManeuverEnv {
 public:
  ManeuverEnv(const sim::Simulator& sim, const reward::DynamicModel* dynamic, const reward::SafetyModel* safety,
              reward::RewardMask mask);

  sim::Observation reset(std::uint64_t seed);

  struct Step {
    sim::Observation observation;
    reward::RewardBreakdown reward;  // masked; what the agent optimizes
    reward::RewardBreakdown raw;     // every available head
    bool done = false;
    bool goal_reached = false;
  };
  Step step(const JointVector& action);

  const sim::SimState& state() const { return state_; }
  double d0() const { return scorer_.d0(); }
  double goal_distance() const;

 private:
  const sim::Simulator* sim_;
  reward::RewardMask mask_;
  reward::StepScorer scorer_;
  sim::SimState state_;
};

}  // namespace opscore::ppo
