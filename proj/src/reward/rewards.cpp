#include "opscore/reward/rewards.hpp"

#include <sstream>

#include "opscore/common/error.hpp"

namespace opscore::reward {

RewardMask RewardMask::parse(const std::string& text) {
  RewardMask mask{false, false, false};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "task") mask.task = true;
    else if (item == "dynamic") mask.dynamic = true;
    else if (item == "safety") mask.safety = true;
    else fail(ErrorCode::InvalidArgument, "unknown reward head '" + item + "'");
  }
  if (mask.empty()) fail(ErrorCode::EmptyMask, "no reward head enabled");
  return mask;
}

std::string RewardMask::to_string() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ",";
    out += name;
  };
  add(task, "task");
  add(dynamic, "dynamic");
  add(safety, "safety");
  return out;
}

double task_reward(const Vec3& bucket_tip, const Vec3& goal, double d0) {
  require(d0 > 0, ErrorCode::InvalidArgument, "d0 must be positive");
  return 1.0 - (goal - bucket_tip).norm() / d0;
}

RewardBreakdown assemble_reward(double r_g, double r_d, double r_s, const RewardMask& mask) {
  if (mask.empty()) fail(ErrorCode::EmptyMask, "no reward head enabled");
  RewardBreakdown out;
  out.r_g = mask.task ? r_g : 0.0;
  out.r_d = mask.dynamic ? r_d : 0.0;
  out.r_s = mask.safety ? r_s : 0.0;
  out.total = out.r_g + out.r_d + out.r_s;
  return out;
}

StepScorer::StepScorer(const DynamicModel* dynamic, const SafetyModel* safety, Vec3 goal, double d0)
    : dynamic_(dynamic), safety_(safety), goal_(std::move(goal)), d0_(d0) {
  require(d0 > 0, ErrorCode::InvalidArgument, "d0 must be positive");
}

void StepScorer::reset() {
  history_.clear();
  seen_ = 0;
}

WindowRows StepScorer::current_window() const {
  require(!history_.empty(), ErrorCode::InvalidArgument, "no telemetry recorded yet");
  WindowRows w;
  const int pad = kWindowLength - static_cast<int>(history_.size());
  for (int k = 0; k < kWindowLength; ++k) {
    const Vec3& row = k < pad ? history_.front() : history_[static_cast<std::size_t>(k - pad)];
    w.row(k) = row.transpose();
  }
  return w;
}

StepScorer::Result StepScorer::score(const Vec3& telemetry, const InfractionCounts& infractions_step,
                                     const Vec3& bucket_tip) {
  history_.push_back(telemetry);
  if (history_.size() > static_cast<std::size_t>(kWindowLength)) history_.pop_front();
  ++seen_;

  Result out;
  out.padded = seen_ < static_cast<std::size_t>(kWindowLength);
  out.raw.r_g = task_reward(bucket_tip, goal_, d0_);
  if (dynamic_) out.raw.r_d = score_dynamic(*dynamic_, current_window());
  if (safety_) out.raw.r_s = score_safety(*safety_, infractions_step.cast<double>());
  out.raw.total = out.raw.r_g + out.raw.r_d + out.raw.r_s;
  return out;
}

}  // namespace opscore::reward
