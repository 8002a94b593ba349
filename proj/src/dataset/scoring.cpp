#include "opscore/dataset/scoring.hpp"

namespace opscore::dataset {

SessionScorer::SessionScorer(const sim::Simulator& sim, const reward::DynamicModel* dynamic,
                             const reward::SafetyModel* safety, ScoringWeights weights)
    : scorer_(dynamic, safety, sim.scenario().goal, sim.initial_goal_distance()),
      mask_{true, dynamic != nullptr, safety != nullptr},
      weights_(weights) {
  weights_.validate();
}

void SessionScorer::reset() {
  scorer_.reset();
  totals_.setZero();
}

SessionScorer::StepScore SessionScorer::score(const StepRecord& record) {
  const auto r = scorer_.score(record.dynamic, record.infractions, record.bucket);
  totals_ += record.infractions;
  StepScore out;
  out.t = record.t;
  out.rewards = reward::assemble_reward(r.raw.r_g, r.raw.r_d, r.raw.r_s, mask_);
  out.padded = r.padded;
  out.totals = totals_;
  out.score_so_far = score_counts(totals_, weights_);
  return out;
}

std::vector<SessionScorer::StepScore> score_steps(const SessionLog& log, SessionScorer& scorer) {
  scorer.reset();
  std::vector<SessionScorer::StepScore> out;
  out.reserve(log.steps.size());
  for (const StepRecord& s : log.steps) out.push_back(scorer.score(s));
  return out;
}

}  // namespace opscore::dataset
