#pragma once

#include <cstdint>
#include <string>

#include "opscore/dataset/session.hpp"
#include "opscore/sim/simulator.hpp"

namespace opscore::dataset {

enum class ControllerKind { expert, novice };

// Joint-space waypoint tracker: lift above the pole fence at the start
// angle, swing to the goal angle at height, then descend onto the goal.
struct ControllerParams {
  double gain = 0.8;            // 1/s, joint-velocity command per rad of error
  double max_setpoint = 0.7;    // magnitude cap on normalized setpoints
  double clearance = 1.2;       // m above the tallest pole top
  double switch_tolerance = 0.03;  // rad, waypoint hand-over
  double max_setpoint_rate = 0.0;  // per-step setpoint change limit, 0 = none
  // Novice perturbations.
  double ou_theta = 0.0;
  double ou_sigma = 0.0;
  double pause_probability = 0.0;
  int pause_min_steps = 0;
  int pause_max_steps = 0;
};

// Seed-jittered parameters for one run of the given kind.
ControllerParams sample_params(ControllerKind kind, std::uint64_t seed);

// Runs one episode. ControllerDiverged if an expert run ends without reaching the goal.
SessionLog run_scripted_controller(ControllerKind kind, const sim::Simulator& sim, std::uint64_t seed,
                                   const ScoringWeights& weights = {});

SessionLog run_controller(const ControllerParams& params, ControllerLabel label, const sim::Simulator& sim,
                          std::uint64_t seed, const ScoringWeights& weights = {});

}  // namespace opscore::dataset
