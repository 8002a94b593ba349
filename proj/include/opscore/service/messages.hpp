#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "opscore/common/json.hpp"
#include "opscore/common/types.hpp"
#include "opscore/reward/rewards.hpp"

namespace opscore::service {

inline constexpr int kMessageSchemaVersion = 1;

// Wire error codes.
inline constexpr std::string_view kOutOfRange = "OUT_OF_RANGE";
inline constexpr std::string_view kMalformedMessage = "MALFORMED_MESSAGE";
inline constexpr std::string_view kVersionMismatch = "VERSION_MISMATCH";
inline constexpr std::string_view kNotFound = "NOT_FOUND";
inline constexpr std::string_view kUnknownScenario = "UNKNOWN_SCENARIO";

struct ControlMessage {
  JointVector setpoints = JointVector::Zero();
};
struct ResetMessage {
  std::uint64_t seed = 0;
};
struct StartMessage {
  std::string scenario_id;
};
struct ReplayMessage {
  std::string session_id;
};

using ClientMessage = std::variant<ControlMessage, ResetMessage, StartMessage, ReplayMessage>;

// MalformedMessage for bad JSON, unknown types or missing fields,
// VersionMismatch for a schema_version other than 1. Setpoint range is not
// checked here.
ClientMessage parse_client_message(std::string_view text);
Json to_json(const ClientMessage& message);

struct EngineFields {
  double torque = 0.0;
  double power = 0.0;
  double fuel = 0.0;
};

struct StateMessage {
  int t = 0;
  JointVector joints = JointVector::Zero();
  Vec3 bucket = Vec3::Zero();
  EngineFields engine;
  InfractionCounts infractions_step = InfractionCounts::Zero();
  InfractionCounts infractions_total = InfractionCounts::Zero();
  reward::RewardBreakdown rewards;
  double score_so_far = 0.0;
};

struct SummaryMessage {
  std::string session_id;
  double final_score = 0.0;
  bool is_expert = true;
  InfractionCounts totals = InfractionCounts::Zero();
  int steps = 0;
};

struct ErrorMessage {
  std::string code;
  std::string detail;
};

using ServerMessage = std::variant<StateMessage, SummaryMessage, ErrorMessage>;

Json to_json(const ServerMessage& message);
// Same error behaviour as parse_client_message.
ServerMessage parse_server_message(std::string_view text);

}  // namespace opscore::service
