#pragma once

#include <vector>

#include "opscore/dataset/session.hpp"
#include "opscore/reward/rewards.hpp"
#include "opscore/sim/simulator.hpp"

namespace opscore::dataset {

// Scores recorded steps one at a time. Offline scoring, live feedback and
// replay all go through this class.
class SessionScorer {
 public:
  // Either model may be null; its head then reads 0 and is left out of the total.
  SessionScorer(const sim::Simulator& sim, const reward::DynamicModel* dynamic, const reward::SafetyModel* safety,
                ScoringWeights weights = {});

  struct StepScore {
    int t = 0;
    reward::RewardBreakdown rewards;
    bool padded = false;
    InfractionCounts totals = InfractionCounts::Zero();
    double score_so_far = 0.0;
  };

  void reset();
  StepScore score(const StepRecord& record);

  reward::RewardMask mask() const { return mask_; }
  const ScoringWeights& weights() const { return weights_; }

 private:
  reward::StepScorer scorer_;
  reward::RewardMask mask_;
  ScoringWeights weights_;
  InfractionCounts totals_ = InfractionCounts::Zero();
};

std::vector<SessionScorer::StepScore> score_steps(const SessionLog& log, SessionScorer& scorer);

}  // namespace opscore::dataset
