#include "opscore/service/messages.hpp"

namespace opscore::service {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

Json parse_envelope(std::string_view text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail(ErrorCode::MalformedMessage, "message is not a JSON object");
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
    fail(ErrorCode::MalformedMessage, "missing integer schema_version");
  const int version = j["schema_version"].get<int>();
  if (version != kMessageSchemaVersion)
    fail(ErrorCode::VersionMismatch, "schema_version " + std::to_string(version) + ", expected " +
                                         std::to_string(kMessageSchemaVersion));
  if (!j.contains("type") || !j["type"].is_string()) fail(ErrorCode::MalformedMessage, "missing string type");
  return j;
}

const Json& member(const Json& j, const char* key) {
  if (!j.contains(key)) fail(ErrorCode::MalformedMessage, std::string("missing field '") + key + "'");
  return j[key];
}

template <typename V>
V vector_field(const Json& j, const char* key) {
  try {
    return json_vector<V>(member(j, key), key);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) fail(ErrorCode::MalformedMessage, e.detail());
    throw;
  }
}

double number_field(const Json& j, const char* key) {
  const Json& v = member(j, key);
  if (!v.is_number()) fail(ErrorCode::MalformedMessage, std::string(key) + " must be a number");
  return v.get<double>();
}

std::string string_field(const Json& j, const char* key) {
  const Json& v = member(j, key);
  if (!v.is_string()) fail(ErrorCode::MalformedMessage, std::string(key) + " must be a string");
  return v.get<std::string>();
}

int int_field(const Json& j, const char* key) {
  const Json& v = member(j, key);
  if (!v.is_number_integer()) fail(ErrorCode::MalformedMessage, std::string(key) + " must be an integer");
  return v.get<int>();
}

Json envelope(const char* type) { return Json{{"schema_version", kMessageSchemaVersion}, {"type", type}}; }

}  // namespace

ClientMessage parse_client_message(std::string_view text) {
  const Json j = parse_envelope(text);
  const std::string type = j["type"].get<std::string>();
  if (type == "control") return ControlMessage{vector_field<JointVector>(j, "setpoints")};
  if (type == "reset") {
    const Json& seed = member(j, "seed");
    if (!seed.is_number_unsigned()) fail(ErrorCode::MalformedMessage, "seed must be a non-negative integer");
    return ResetMessage{seed.get<std::uint64_t>()};
  }
  if (type == "start") return StartMessage{string_field(j, "scenario_id")};
  if (type == "replay") return ReplayMessage{string_field(j, "session_id")};
  fail(ErrorCode::MalformedMessage, "unknown message type '" + type + "'");
}

Json to_json(const ClientMessage& message) {
  return std::visit(overloaded{
                        [](const ControlMessage& m) {
                          Json j = envelope("control");
                          j["setpoints"] = to_json_array(m.setpoints);
                          return j;
                        },
                        [](const ResetMessage& m) {
                          Json j = envelope("reset");
                          j["seed"] = m.seed;
                          return j;
                        },
                        [](const StartMessage& m) {
                          Json j = envelope("start");
                          j["scenario_id"] = m.scenario_id;
                          return j;
                        },
                        [](const ReplayMessage& m) {
                          Json j = envelope("replay");
                          j["session_id"] = m.session_id;
                          return j;
                        },
                    },
                    message);
}

Json to_json(const ServerMessage& message) {
  return std::visit(overloaded{
                        [](const StateMessage& m) {
                          Json j = envelope("state");
                          j["t"] = m.t;
                          j["joints"] = to_json_array(m.joints);
                          j["bucket"] = to_json_array(m.bucket);
                          j["engine"] = {{"torque", m.engine.torque}, {"power", m.engine.power}, {"fuel", m.engine.fuel}};
                          j["infractions_step"] = to_json_array(m.infractions_step);
                          j["infractions_total"] = to_json_array(m.infractions_total);
                          j["rewards"] = {{"r_g", m.rewards.r_g},
                                          {"r_d", m.rewards.r_d},
                                          {"r_s", m.rewards.r_s},
                                          {"total", m.rewards.total}};
                          j["score_so_far"] = m.score_so_far;
                          return j;
                        },
                        [](const SummaryMessage& m) {
                          Json j = envelope("summary");
                          j["session_id"] = m.session_id;
                          j["final_score"] = m.final_score;
                          j["is_expert"] = m.is_expert;
                          j["totals"] = to_json_array(m.totals);
                          j["steps"] = m.steps;
                          return j;
                        },
                        [](const ErrorMessage& m) {
                          Json j = envelope("error");
                          j["code"] = m.code;
                          j["detail"] = m.detail;
                          return j;
                        },
                    },
                    message);
}

ServerMessage parse_server_message(std::string_view text) {
  const Json j = parse_envelope(text);
  const std::string type = j["type"].get<std::string>();
  if (type == "state") {
    StateMessage m;
    m.t = int_field(j, "t");
    m.joints = vector_field<JointVector>(j, "joints");
    m.bucket = vector_field<Vec3>(j, "bucket");
    const Json& engine = member(j, "engine");
    m.engine = {number_field(engine, "torque"), number_field(engine, "power"), number_field(engine, "fuel")};
    m.infractions_step = vector_field<InfractionCounts>(j, "infractions_step");
    m.infractions_total = vector_field<InfractionCounts>(j, "infractions_total");
    const Json& r = member(j, "rewards");
    m.rewards = {number_field(r, "r_g"), number_field(r, "r_d"), number_field(r, "r_s"), number_field(r, "total")};
    m.score_so_far = number_field(j, "score_so_far");
    return m;
  }
  if (type == "summary") {
    SummaryMessage m;
    m.session_id = string_field(j, "session_id");
    m.final_score = number_field(j, "final_score");
    const Json& expert = member(j, "is_expert");
    if (!expert.is_boolean()) fail(ErrorCode::MalformedMessage, "is_expert must be a boolean");
    m.is_expert = expert.get<bool>();
    m.totals = vector_field<InfractionCounts>(j, "totals");
    m.steps = int_field(j, "steps");
    return m;
  }
  if (type == "error") return ErrorMessage{string_field(j, "code"), string_field(j, "detail")};
  fail(ErrorCode::MalformedMessage, "unknown message type '" + type + "'");
}

}  // namespace opscore::service
