#pragma once

#include <filesystem>

#include "opscore/common/json.hpp"
#include "opscore/sim/types.hpp"

namespace opscore::sim {

inline constexpr int kScenarioSchemaVersion = 1;

struct ScenarioFile {
  ExcavatorConfig excavator;
  WorldScenario world;
};

// Start (-9.8, -144.1, 2.4), goal (-2, -150, 0.5); two radial fences of five
// poles across the swing arc, at one and two thirds of the way from start to
// goal, and two balls near the goal approach.
ScenarioFile reference_scenario();

Json to_json(const ScenarioFile& scenario);
// Missing keys keep their defaults; ParseError on malformed values,
// VersionMismatch on an unknown schema_version.
ScenarioFile scenario_from_json(const Json& j);

ScenarioFile load_scenario(const std::filesystem::path& path);
void save_scenario(const std::filesystem::path& path, const ScenarioFile& scenario);

// "reference" (or empty) selects the built-in scenario, anything else is a path.
ScenarioFile resolve_scenario(const std::string& spec);

}  // namespace opscore::sim
