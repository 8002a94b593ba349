#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "opscore/common/json.hpp"
#include "opscore/common/types.hpp"
#include "opscore/reward/rewards.hpp"
#include "opscore/sim/types.hpp"

namespace opscore::dataset {

inline constexpr int kSessionSchemaVersion = 1;
inline constexpr double kExpertThreshold = -25.0;

enum class ControllerLabel { expert_scripted, novice_scripted, human, policy };

std::string to_string(ControllerLabel label);
// ParseError on unknown names.
ControllerLabel parse_label(const std::string& name);

struct StepRecord {
  int t = 0;
  JointVector action = JointVector::Zero();
  JointVector joints = JointVector::Zero();
  sim::Observation observation = sim::Observation::Zero();
  Vec3 dynamic = Vec3::Zero();
  InfractionCounts infractions = InfractionCounts::Zero();
  Vec3 bucket = Vec3::Zero();
  std::optional<reward::RewardBreakdown> reward;
};

struct SessionLog {
  std::string session_id;
  ControllerLabel label = ControllerLabel::human;
  std::uint64_t seed = 0;
  std::string scenario = "reference";
  bool goal_reached = false;
  std::vector<StepRecord> steps;
  double final_score = 0.0;
  bool is_expert = true;

  InfractionCounts total_infractions() const;
  // Steps x 3 matrix of (torque, power, fuel).
  MatX dynamic_rows() const;
};

// Penalty points per infraction type, in InfractionCounts order.
struct ScoringWeights {
  double pole_touched = 3.0;
  double pole_fell = 10.0;
  double env_collision = 5.0;
  double ball_knocked = 5.0;
  double equipment_collision = 10.0;

  Eigen::Matrix<double, kNumInfractionTypes, 1> as_vector() const;
  // InvalidArgument unless every penalty is positive.
  void validate() const;
};

// max(-100, -sum_type penalty * total count).
double score_session(const SessionLog& log, const ScoringWeights& weights = {});
double score_counts(const InfractionCounts& totals, const ScoringWeights& weights = {});

// Recomputes final_score and is_expert from the steps.
void finalize_session(SessionLog& log, const ScoringWeights& weights = {});

StepRecord make_step_record(const sim::SimState& state, const sim::Action& action, const sim::ExcavatorConfig& config);

// JSON lines: one header object, then one object per step.
std::string session_to_jsonl(const SessionLog& log);
// ParseError (with the 1-based line number) on malformed content,
// VersionMismatch on an unknown schema_version.
SessionLog session_from_jsonl(const std::string& text);

void write_session(const std::filesystem::path& path, const SessionLog& log);
SessionLog read_session(const std::filesystem::path& path);

Json step_to_json(const StepRecord& step);
StepRecord step_from_json(const Json& j);

}  // namespace opscore::dataset
