#include "opscore/service/session.hpp"

#include <cctype>

namespace opscore::service {
namespace {

Json error_json(std::string_view code, const std::string& detail) {
  return to_json(ServerMessage{ErrorMessage{std::string(code), detail}});
}

bool safe_session_id(const std::string& id) {
  if (id.empty() || id.front() == '.') return false;
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) return false;
  return true;
}

}  // namespace

FeedbackSession::FeedbackSession(const ServiceContext& context)
    : context_(context), scenario_id_(context.default_scenario) {}

std::vector<Json> FeedbackSession::handle(std::string_view text) {
  std::vector<Json> out;
  ClientMessage message;
  try {
    message = parse_client_message(text);
  } catch (const Error& e) {
    out.push_back(error_json(e.code() == ErrorCode::VersionMismatch ? kVersionMismatch : kMalformedMessage, e.detail()));
    return out;
  }

  if (const auto* control = std::get_if<ControlMessage>(&message)) {
    const JointVector& s = control->setpoints;
    if (!s.allFinite() || (s.array().abs() > 1.0).any()) {
      out.push_back(error_json(kOutOfRange, "setpoints must lie in [-1, 1]"));
      return out;
    }
    setpoints_ = s;
  } else if (const auto* reset = std::get_if<ResetMessage>(&message)) {
    finish(out);
    start_live(scenario_id_, reset->seed, out);
  } else if (const auto* start = std::get_if<StartMessage>(&message)) {
    if (!context_.scenarios.count(start->scenario_id)) {
      out.push_back(error_json(kUnknownScenario, "no scenario '" + start->scenario_id + "'"));
      return out;
    }
    finish(out);
    start_live(start->scenario_id, 0, out);
  } else if (const auto* replay = std::get_if<ReplayMessage>(&message)) {
    start_replay(replay->session_id, out);
  }
  return out;
}

void FeedbackSession::start_live(const std::string& scenario_id, std::uint64_t seed, std::vector<Json>& out) {
  auto it = context_.scenarios.find(scenario_id);
  if (it == context_.scenarios.end()) {
    out.push_back(error_json(kUnknownScenario, "no scenario '" + scenario_id + "'"));
    return;
  }
  scenario_id_ = scenario_id;
  sim_ = &it->second;
  scorer_.emplace(*sim_, context_.dynamic, context_.safety, context_.weights);
  setpoints_.setZero();
  state_ = sim_->reset(seed);

  log_ = dataset::SessionLog{};
  log_.session_id = "live-" + scenario_id + "-s" + std::to_string(seed) + "-" +
                    std::to_string(context_.session_counter->fetch_add(1));
  log_.label = dataset::ControllerLabel::human;
  log_.seed = seed;
  log_.scenario = scenario_id;
  mode_ = Mode::live;

  // The reset pose is streamed and recorded as step 0.
  log_.steps.push_back(dataset::make_step_record(state_, sim::Action::zero(), sim_->config()));
  out.push_back(state_json(log_.steps.back()));
}

void FeedbackSession::start_replay(const std::string& session_id, std::vector<Json>& out) {
  if (!safe_session_id(session_id)) {
    out.push_back(error_json(kNotFound, "invalid session id '" + session_id + "'"));
    return;
  }
  const auto path = context_.sessions_dir / (session_id + ".jsonl");
  dataset::SessionLog log;
  try {
    log = dataset::read_session(path);
  } catch (const Error& e) {
    out.push_back(error_json(kNotFound, "session '" + session_id + "': " + e.detail()));
    return;
  }
  auto it = context_.scenarios.find(log.scenario);
  if (it == context_.scenarios.end()) {
    out.push_back(error_json(kUnknownScenario, "session uses scenario '" + log.scenario + "'"));
    return;
  }
  finish(out);
  if (log.session_id.empty()) log.session_id = session_id;
  sim_ = &it->second;
  scorer_.emplace(*sim_, context_.dynamic, context_.safety, context_.weights);
  log_ = std::move(log);
  replay_cursor_ = 0;
  mode_ = Mode::replay;
  if (log_.steps.empty()) finish(out);
}

std::vector<Json> FeedbackSession::tick() {
  std::vector<Json> out;
  if (mode_ == Mode::live) {
    const sim::Action action{setpoints_};
    state_ = sim_->step(state_, action);
    log_.steps.push_back(dataset::make_step_record(state_, action, sim_->config()));
    out.push_back(state_json(log_.steps.back()));
    if (state_.done) finish(out);
  } else if (mode_ == Mode::replay) {
    out.push_back(state_json(log_.steps[replay_cursor_++]));
    if (replay_cursor_ == log_.steps.size()) finish(out);
  }
  return out;
}

Json FeedbackSession::state_json(const dataset::StepRecord& record) {
  const auto s = scorer_->score(record);
  StateMessage m;
  m.t = record.t;
  m.joints = record.joints;
  m.bucket = record.bucket;
  m.engine = {record.dynamic(0), record.dynamic(1), record.dynamic(2)};
  m.infractions_step = record.infractions;
  m.infractions_total = s.totals;
  m.rewards = s.rewards;
  m.score_so_far = s.score_so_far;
  return to_json(ServerMessage{m});
}

void FeedbackSession::finish(std::vector<Json>& out) {
  if (mode_ == Mode::idle) return;
  if (mode_ == Mode::live) {
    log_.goal_reached = state_.goal_reached;
    dataset::finalize_session(log_, context_.weights);
    if (!context_.record_dir.empty()) {
      auto path = context_.record_dir / (log_.session_id + ".jsonl");
      dataset::write_session(path, log_);
      last_recording_ = std::move(path);
    }
  } else {
    dataset::finalize_session(log_, context_.weights);
  }
  SummaryMessage m;
  m.session_id = log_.session_id;
  m.final_score = log_.final_score;
  m.is_expert = log_.is_expert;
  m.totals = log_.total_infractions();
  m.steps = static_cast<int>(log_.steps.size());
  out.push_back(to_json(ServerMessage{m}));
  mode_ = Mode::idle;
}

}  // namespace opscore::service
