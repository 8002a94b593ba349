#pragma once

#include "opscore/sim/types.hpp"

namespace opscore::sim {

struct InfractionUpdate {
  InfractionCounts counts = InfractionCounts::Zero();
  WorldFlags flags;
};

WorldFlags initial_world_flags(const WorldScenario& scenario);

// Point tests on the bucket tip with event latching: a pole, the ground /
// workspace boundary and the cab zone each count once per contact event,
// balls once ever. A pole topples when the tip contacts it faster than its
// threshold; fallen poles no longer collide. `after` must already carry the
// post-step kinematic points; its world flags are ignored.
InfractionUpdate detect_infractions(const SimState& before, const SimState& after, const WorldScenario& scenario,
                                    const ExcavatorConfig& config);

}  // namespace opscore::sim
