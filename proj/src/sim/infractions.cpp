#include "opscore/sim/infractions.hpp"

namespace opscore::sim {
namespace {

enum Slot { kPoleTouched = 0, kPoleFell = 1, kEnvCollision = 2, kBallKnocked = 3, kEquipmentCollision = 4 };

bool touches_pole(const Vec3& tip, const Pole& pole) {
  if (tip.z() < pole.position.z() || tip.z() > pole.position.z() + pole.height) return false;
  return (tip - pole.position).head<2>().norm() < pole.radius;
}

}  // namespace

WorldFlags initial_world_flags(const WorldScenario& scenario) {
  WorldFlags flags;
  flags.poles.assign(scenario.poles.size(), PoleState::upright);
  flags.pole_contact.assign(scenario.poles.size(), false);
  flags.balls_knocked.assign(scenario.balls.size(), false);
  return flags;
}

InfractionUpdate detect_infractions(const SimState& before, const SimState& after, const WorldScenario& scenario,
                                    const ExcavatorConfig& config) {
  InfractionUpdate update;
  update.flags = before.world;
  WorldFlags& flags = update.flags;
  const Vec3& tip = after.points.bucket_tip;
  const double tip_speed = (after.points.bucket_tip - before.points.bucket_tip).norm() / config.dt;

  for (std::size_t i = 0; i < scenario.poles.size(); ++i) {
    if (flags.poles[i] == PoleState::fallen) continue;
    const Pole& pole = scenario.poles[i];
    const bool contact = touches_pole(tip, pole);
    if (contact && !flags.pole_contact[i]) {
      update.counts(kPoleTouched) += 1;
      flags.poles[i] = PoleState::touched;
    }
    if (contact && tip_speed > pole.topple_speed_threshold) {
      update.counts(kPoleFell) += 1;
      flags.poles[i] = PoleState::fallen;
      flags.pole_contact[i] = false;
      continue;
    }
    flags.pole_contact[i] = contact;
  }

  for (std::size_t i = 0; i < scenario.balls.size(); ++i) {
    if (flags.balls_knocked[i]) continue;
    const Ball& ball = scenario.balls[i];
    if ((tip - ball.position).norm() < ball.radius) {
      flags.balls_knocked[i] = true;
      update.counts(kBallKnocked) += 1;
    }
  }

  const bool outside = tip.z() < scenario.ground_z || !scenario.workspace_bounds.contains(tip);
  if (outside && !flags.env_contact) update.counts(kEnvCollision) += 1;
  flags.env_contact = outside;

  const Vec3 from_base = tip - config.base_position;
  const bool in_cab_zone =
      from_base.head<2>().norm() < config.cab_exclusion_radius && from_base.z() < config.cab_exclusion_top;
  if (in_cab_zone && !flags.equipment_contact) update.counts(kEquipmentCollision) += 1;
  flags.equipment_contact = in_cab_zone;

  return update;
}

}  // namespace opscore::sim
