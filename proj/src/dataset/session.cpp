#include "opscore/dataset/session.hpp"

#include <algorithm>
#include <sstream>

#include "opscore/common/checksum.hpp"
#include "opscore/common/error.hpp"
#include "opscore/sim/simulator.hpp"

namespace opscore::dataset {

namespace {

constexpr std::pair<ControllerLabel, const char*> kLabels[] = {
    {ControllerLabel::expert_scripted, "expert_scripted"},
    {ControllerLabel::novice_scripted, "novice_scripted"},
    {ControllerLabel::human, "human"},
    {ControllerLabel::policy, "policy"},
};

const Json& field(const Json& j, const char* key) {
  if (!j.contains(key)) fail(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  return j[key];
}

}  // namespace

std::string to_string(ControllerLabel label) {
  for (const auto& [l, name] : kLabels)
    if (l == label) return name;
  return "human";
}

ControllerLabel parse_label(const std::string& name) {
  for (const auto& [l, n] : kLabels)
    if (name == n) return l;
  fail(ErrorCode::ParseError, "unknown controller label '" + name + "'");
}

InfractionCounts SessionLog::total_infractions() const {
  InfractionCounts total = InfractionCounts::Zero();
  for (const auto& s : steps) total += s.infractions;
  return total;
}

MatX SessionLog::dynamic_rows() const {
  MatX rows(static_cast<Eigen::Index>(steps.size()), kNumDynamicFeatures);
  for (std::size_t i = 0; i < steps.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = steps[i].dynamic.transpose();
  return rows;
}

Eigen::Matrix<double, kNumInfractionTypes, 1> ScoringWeights::as_vector() const {
  return {pole_touched, pole_fell, env_collision, ball_knocked, equipment_collision};
}

void ScoringWeights::validate() const {
  require((as_vector().array() > 0).all(), ErrorCode::InvalidArgument, "scoring penalties must be positive");
}

double score_counts(const InfractionCounts& totals, const ScoringWeights& weights) {
  return std::max(-100.0, -weights.as_vector().dot(totals.cast<double>())) + 0.0;
}

double score_session(const SessionLog& log, const ScoringWeights& weights) {
  return score_counts(log.total_infractions(), weights);
}

void finalize_session(SessionLog& log, const ScoringWeights& weights) {
  log.final_score = score_session(log, weights);
  log.is_expert = log.final_score > kExpertThreshold;
}

StepRecord make_step_record(const sim::SimState& state, const sim::Action& action,
                            const sim::ExcavatorConfig& config) {
  StepRecord r;
  r.t = state.t;
  r.action = action.setpoints;
  r.joints = state.joint_angles;
  r.observation = sim::build_observation(state, config);
  r.dynamic = state.engine.as_vector();
  r.infractions = state.infractions_step;
  r.bucket = state.bucket_tip();
  return r;
}

Json step_to_json(const StepRecord& s) {
  Json j;
  j["t"] = s.t;
  j["action"] = to_json_array(s.action);
  j["joints"] = to_json_array(s.joints);
  j["observation"] = to_json_array(s.observation);
  j["dynamic"] = to_json_array(s.dynamic);
  j["infractions"] = to_json_array(s.infractions);
  j["bucket"] = to_json_array(s.bucket);
  if (s.reward) j["reward"] = {{"r_g", s.reward->r_g}, {"r_d", s.reward->r_d}, {"r_s", s.reward->r_s}, {"total", s.reward->total}};
  return j;
}

StepRecord step_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::ParseError, "step record must be an object");
  StepRecord s;
  const Json& t = field(j, "t");
  if (!t.is_number_integer()) fail(ErrorCode::ParseError, "t must be an integer");
  s.t = t.get<int>();
  s.action = json_vector<JointVector>(field(j, "action"), "action");
  s.joints = json_vector<JointVector>(field(j, "joints"), "joints");
  s.observation = json_vector<sim::Observation>(field(j, "observation"), "observation");
  s.dynamic = json_vector<Vec3>(field(j, "dynamic"), "dynamic");
  s.infractions = json_vector<InfractionCounts>(field(j, "infractions"), "infractions");
  s.bucket = json_vector<Vec3>(field(j, "bucket"), "bucket");
  if (j.contains("reward")) {
    const Json& r = j["reward"];
    try {
      s.reward = reward::RewardBreakdown{r.at("r_g").get<double>(), r.at("r_d").get<double>(),
                                         r.at("r_s").get<double>(), r.at("total").get<double>()};
    } catch (const Json::exception& e) {
      fail(ErrorCode::ParseError, std::string("reward: ") + e.what());
    }
  }
  if ((s.infractions.array() < 0).any()) fail(ErrorCode::ParseError, "negative infraction count");
  return s;
}

std::string session_to_jsonl(const SessionLog& log) {
  Json header;
  header["schema_version"] = kSessionSchemaVersion;
  header["session_id"] = log.session_id;
  header["label"] = to_string(log.label);
  header["seed"] = log.seed;
  header["scenario"] = log.scenario;
  header["goal_reached"] = log.goal_reached;
  header["final_score"] = log.final_score;
  header["is_expert"] = log.is_expert;
  header["steps"] = log.steps.size();
  std::string out = header.dump();
  out += '\n';
  for (const auto& s : log.steps) {
    out += step_to_json(s).dump();
    out += '\n';
  }
  return out;
}

SessionLog session_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  SessionLog log;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      if (!have_header) {
        const Json& v = field(j, "schema_version");
        if (!v.is_number_integer()) fail(ErrorCode::ParseError, "schema_version must be an integer");
        if (v.get<int>() != kSessionSchemaVersion)
          fail(ErrorCode::VersionMismatch, "session schema_version " + v.dump());
        log.session_id = field(j, "session_id").get<std::string>();
        log.label = parse_label(field(j, "label").get<std::string>());
        log.seed = field(j, "seed").get<std::uint64_t>();
        log.scenario = j.value("scenario", std::string("reference"));
        log.goal_reached = j.value("goal_reached", false);
        log.final_score = field(j, "final_score").get<double>();
        log.is_expert = field(j, "is_expert").get<bool>();
        have_header = true;
        continue;
      }
      StepRecord s = step_from_json(j);
      if (!log.steps.empty() && s.t <= log.steps.back().t) fail(ErrorCode::ParseError, "t must strictly increase");
      log.steps.push_back(std::move(s));
    } catch (const Json::exception& e) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ParseError) throw;
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  if (!have_header) fail(ErrorCode::ParseError, "empty session file");
  if (log.final_score < -100.0 || log.final_score > 0.0) fail(ErrorCode::ParseError, "final_score outside [-100, 0]");
  return log;
}

void write_session(const std::filesystem::path& path, const SessionLog& log) {
  write_file(path, session_to_jsonl(log));
}

SessionLog read_session(const std::filesystem::path& path) { return session_from_jsonl(read_file(path)); }

}  // namespace opscore::dataset
