#pragma once

#include <deque>
#include <string>

#include "opscore/common/types.hpp"
#include "opscore/reward/dynamic_model.hpp"
#include "opscore/reward/safety_model.hpp"

namespace opscore::reward {

struct RewardMask {
  bool task = true;
  bool dynamic = false;
  bool safety = false;

  bool empty() const { return !task && !dynamic && !safety; }
  static RewardMask all() { return {true, true, true}; }
  // Comma-separated subset of {task, dynamic, safety}; InvalidArgument otherwise.
  static RewardMask parse(const std::string& text);
  std::string to_string() const;
};

struct RewardBreakdown {
  double r_g = 0.0;
  double r_d = 0.0;
  double r_s = 0.0;
  double total = 0.0;
};

// r_g = 1 - ||goal - bucket|| / d0.
double task_reward(const Vec3& bucket_tip, const Vec3& goal, double d0);

// Disabled heads are zeroed and excluded from the total. EmptyMask if no head is enabled.
RewardBreakdown assemble_reward(double r_g, double r_d, double r_s, const RewardMask& mask);

// Per-step scoring shared by offline scoring, live feedback and policy
// training. Keeps the last 32 telemetry rows; until 32 rows exist the window
// is padded by repeating the first row.
class StepScorer {
 public:
  StepScorer(const DynamicModel* dynamic, const SafetyModel* safety, Vec3 goal, double d0);

  struct Result {
    // Every head that has a model; heads without a model read 0.
    RewardBreakdown raw;
    bool padded = false;
  };

  void reset();
  Result score(const Vec3& telemetry, const InfractionCounts& infractions_step, const Vec3& bucket_tip);

  bool has_dynamic() const { return dynamic_ != nullptr; }
  bool has_safety() const { return safety_ != nullptr; }
  double d0() const { return d0_; }

  // Builds the current 32-row window (with first-row padding).
  WindowRows current_window() const;

 private:
  const DynamicModel* dynamic_;
  const SafetyModel* safety_;
  Vec3 goal_;
  double d0_;
  std::deque<Vec3> history_;
  std::size_t seen_ = 0;
};

}  // namespace opscore::reward
