#include "opscore/sim/scenario_io.hpp"

#include <cmath>

#include "opscore/common/checksum.hpp"

namespace opscore::sim {
namespace {

Vec3 on_arc(const Vec3& base, double angle, double radius, double z) {
  return {base.x() + radius * std::cos(angle), base.y() + radius * std::sin(angle), z};
}

template <typename T>
void read_number(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_number()) fail(ErrorCode::ParseError, std::string(key) + ": expected number");
  out = j[key].get<T>();
}

template <typename V>
void read_vector(const Json& j, const char* key, V& out) {
  if (j.contains(key)) out = json_vector<V>(j[key], key);
}

const char* pole_state_name(PoleState s) {
  switch (s) {
    case PoleState::upright: return "upright";
    case PoleState::touched: return "touched";
    case PoleState::fallen: return "fallen";
  }
  return "upright";
}

}  // namespace

ScenarioFile reference_scenario() {
  ScenarioFile s;
  const Vec3 base = s.excavator.base_position;
  WorldScenario& w = s.world;
  w.name = "reference";
  w.start_bucket = Vec3(-9.8, -144.1, 2.4);
  w.goal = Vec3(-2.0, -150.0, 0.5);
  w.ground_z = 0.0;
  w.workspace_bounds.min = base + Vec3(-11.5, -11.5, -2.0);
  w.workspace_bounds.max = base + Vec3(11.5, 11.5, 12.0);

  constexpr double kStartAngle = 1.7501172809318708;
  constexpr double kGoalAngle = 0.0962932415819597;
  for (double fraction : {1.0 / 3.0, 2.0 / 3.0}) {
    const double fence = kStartAngle + fraction * (kGoalAngle - kStartAngle);
    for (double r : {4.6, 5.4, 6.2, 7.0, 7.8}) {
      Pole p;
      p.position = on_arc(base, fence, r, w.ground_z);
      p.radius = 0.4;
      p.height = 3.0;
      p.topple_speed_threshold = 1.0;
      w.poles.push_back(p);
    }
  }
  w.balls.push_back({on_arc(base, kGoalAngle + 0.25, 6.645, 0.4), 0.4});
  w.balls.push_back({on_arc(base, kGoalAngle, 4.9, 0.4), 0.4});
  return s;
}

Json to_json(const ScenarioFile& scenario) {
  const ExcavatorConfig& c = scenario.excavator;
  const WorldScenario& w = scenario.world;
  Json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["name"] = w.name;
  Json e;
  e["boom_length"] = c.boom_length;
  e["stick_length"] = c.stick_length;
  e["bucket_length"] = c.bucket_length;
  e["joint_min"] = to_json_array(c.joint_min);
  e["joint_max"] = to_json_array(c.joint_max);
  e["max_joint_speed"] = to_json_array(c.max_joint_speed);
  e["actuator_lag_tau"] = c.actuator_lag_tau;
  e["base_position"] = to_json_array(c.base_position);
  e["cab_height"] = c.cab_height;
  e["dt"] = c.dt;
  e["max_steps"] = c.max_steps;
  e["goal_tolerance"] = c.goal_tolerance;
  e["cab_exclusion_radius"] = c.cab_exclusion_radius;
  e["cab_exclusion_top"] = c.cab_exclusion_top;
  Json en;
  en["idle_torque"] = c.engine.idle_torque;
  en["idle_fuel"] = c.engine.idle_fuel;
  en["torque_weights"] = to_json_array(c.engine.torque_weights);
  en["base_load"] = to_json_array(c.engine.base_load);
  en["moment_gain"] = to_json_array(c.engine.moment_gain);
  en["power_gain"] = c.engine.power_gain;
  en["power_speed_exponent"] = c.engine.power_speed_exponent;
  en["fuel_gain"] = c.engine.fuel_gain;
  e["engine"] = en;
  j["excavator"] = e;

  Json world;
  world["ground_z"] = w.ground_z;
  world["workspace_min"] = to_json_array(w.workspace_bounds.min);
  world["workspace_max"] = to_json_array(w.workspace_bounds.max);
  world["goal"] = to_json_array(w.goal);
  world["start_bucket"] = to_json_array(w.start_bucket);
  world["poles"] = Json::array();
  for (const Pole& p : w.poles)
    world["poles"].push_back({{"position", to_json_array(p.position)},
                              {"radius", p.radius},
                              {"height", p.height},
                              {"topple_speed_threshold", p.topple_speed_threshold},
                              {"state", pole_state_name(PoleState::upright)}});
  world["balls"] = Json::array();
  for (const Ball& b : w.balls) world["balls"].push_back({{"position", to_json_array(b.position)}, {"radius", b.radius}});
  j["world"] = world;
  return j;
}

ScenarioFile scenario_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::ParseError, "scenario must be an object");
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
    fail(ErrorCode::ParseError, "scenario lacks integer schema_version");
  if (j["schema_version"].get<int>() != kScenarioSchemaVersion)
    fail(ErrorCode::VersionMismatch, "scenario schema_version " + j["schema_version"].dump());

  ScenarioFile s = reference_scenario();
  if (j.contains("name")) s.world.name = j["name"].get<std::string>();
  if (j.contains("excavator")) {
    const Json& e = j["excavator"];
    ExcavatorConfig& c = s.excavator;
    read_number(e, "boom_length", c.boom_length);
    read_number(e, "stick_length", c.stick_length);
    read_number(e, "bucket_length", c.bucket_length);
    read_vector(e, "joint_min", c.joint_min);
    read_vector(e, "joint_max", c.joint_max);
    read_vector(e, "max_joint_speed", c.max_joint_speed);
    read_number(e, "actuator_lag_tau", c.actuator_lag_tau);
    read_vector(e, "base_position", c.base_position);
    read_number(e, "cab_height", c.cab_height);
    read_number(e, "dt", c.dt);
    read_number(e, "max_steps", c.max_steps);
    read_number(e, "goal_tolerance", c.goal_tolerance);
    read_number(e, "cab_exclusion_radius", c.cab_exclusion_radius);
    read_number(e, "cab_exclusion_top", c.cab_exclusion_top);
    if (e.contains("engine")) {
      const Json& en = e["engine"];
      read_number(en, "idle_torque", c.engine.idle_torque);
      read_number(en, "idle_fuel", c.engine.idle_fuel);
      read_vector(en, "torque_weights", c.engine.torque_weights);
      read_vector(en, "base_load", c.engine.base_load);
      read_vector(en, "moment_gain", c.engine.moment_gain);
      read_number(en, "power_gain", c.engine.power_gain);
      read_number(en, "power_speed_exponent", c.engine.power_speed_exponent);
      read_number(en, "fuel_gain", c.engine.fuel_gain);
    }
  }
  if (j.contains("world")) {
    const Json& w = j["world"];
    WorldScenario& world = s.world;
    read_number(w, "ground_z", world.ground_z);
    read_vector(w, "workspace_min", world.workspace_bounds.min);
    read_vector(w, "workspace_max", world.workspace_bounds.max);
    read_vector(w, "goal", world.goal);
    read_vector(w, "start_bucket", world.start_bucket);
    if (w.contains("poles")) {
      world.poles.clear();
      for (const Json& pj : w["poles"]) {
        Pole p;
        read_vector(pj, "position", p.position);
        read_number(pj, "radius", p.radius);
        read_number(pj, "height", p.height);
        read_number(pj, "topple_speed_threshold", p.topple_speed_threshold);
        world.poles.push_back(p);
      }
    }
    if (w.contains("balls")) {
      world.balls.clear();
      for (const Json& bj : w["balls"]) {
        Ball b;
        read_vector(bj, "position", b.position);
        read_number(bj, "radius", b.radius);
        world.balls.push_back(b);
      }
    }
  }
  return s;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void save_scenario(const std::filesystem::path& path, const ScenarioFile& scenario) {
  write_file(path, to_json(scenario).dump(2) + "\n");
}

ScenarioFile resolve_scenario(const std::string& spec) {
  if (spec.empty() || spec == "reference") return reference_scenario();
  return load_scenario(spec);
}

}  // namespace opscore::sim
