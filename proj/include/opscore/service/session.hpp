#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "opscore/dataset/scoring.hpp"
#include "opscore/dataset/session.hpp"
#include "opscore/service/messages.hpp"
#include "opscore/sim/simulator.hpp"

namespace opscore::service {

// Read-only state shared by every connection.
struct ServiceContext {
  std::map<std::string, sim::Simulator> scenarios;
  // Used by reset before any start message.
  std::string default_scenario = "reference";
  const reward::DynamicModel* dynamic = nullptr;
  const reward::SafetyModel* safety = nullptr;
  dataset::ScoringWeights weights;
  // Finished live sessions are written here as <session_id>.jsonl; empty disables recording.
  std::filesystem::path record_dir;
  // Replay looks up <session_id>.jsonl here.
  std::filesystem::path sessions_dir;
  std::shared_ptr<std::atomic<int>> session_counter = std::make_shared<std::atomic<int>>(0);
};

// One connection's session loop, independent of the transport. handle()
// consumes a client message, tick() advances one step; both return the server
// messages to send, in order.
class FeedbackSession {
 public:
  enum class Mode { idle, live, replay };

  explicit FeedbackSession(const ServiceContext& context);

  std::vector<Json> handle(std::string_view text);
  std::vector<Json> tick();

  Mode mode() const { return mode_; }
  const JointVector& held_setpoints() const { return setpoints_; }
  // Path of the most recently written live session, if any.
  const std::optional<std::filesystem::path>& last_recording() const { return last_recording_; }

 private:
  void start_live(const std::string& scenario_id, std::uint64_t seed, std::vector<Json>& out);
  void start_replay(const std::string& session_id, std::vector<Json>& out);
  void finish(std::vector<Json>& out);
  Json state_json(const dataset::StepRecord& record);

  const ServiceContext& context_;
  Mode mode_ = Mode::idle;
  std::string scenario_id_ = "reference";
  const sim::Simulator* sim_ = nullptr;
  std::optional<dataset::SessionScorer> scorer_;
  sim::SimState state_;
  JointVector setpoints_ = JointVector::Zero();
  dataset::SessionLog log_;
  std::size_t replay_cursor_ = 0;
  std::optional<std::filesystem::path> last_recording_;
};

}  // namespace opscore::service
