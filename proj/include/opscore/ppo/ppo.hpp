#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "opscore/common/rng.hpp"
#include "opscore/nn/adam.hpp"
#include "opscore/ppo/env.hpp"
#include "opscore/ppo/policy.hpp"

namespace opscore::ppo {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  int epochs_per_batch = 10;
  int minibatch = 64;
  int episodes_per_batch = 4;
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  double max_grad_norm = 0.5;
  int episodes = 500;
  reward::RewardMask mask;

  // InvalidArgument unless gamma in (0, 1], clip_eps > 0 and sizes positive.
  void validate() const;
};

struct RolloutStep {
  sim::Observation raw_obs;
  sim::Observation obs;  // normalized, as seen by the collecting policy
  JointVector raw_action = JointVector::Zero();   // pre-clip sample
  double log_prob = 0.0;
  double value = 0.0;
  reward::RewardBreakdown reward;
  bool done = false;
};

struct EpisodeSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the last step
  // V(s_T) after a time-limit cut; 0 when the goal ended the episode.
  double bootstrap_value = 0.0;
};

struct RolloutBuffer {
  std::vector<RolloutStep> steps;
  std::vector<EpisodeSpan> episodes;

  void append(const RolloutBuffer& other);
  std::size_t size() const { return steps.size(); }
};

struct GaeResult {
  VecX advantages;  // raw
  VecX returns;     // advantages + values
  VecX normalized;  // advantages scaled to mean 0, std 1 over the batch
};

// EmptyBuffer on an empty buffer.
GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda);

struct UpdateStats {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double clip_fraction = 0.0;
  double first_ratio_max_deviation = 0.0;  // max |ratio - 1| on the first minibatch
};

struct Optimizers {
  nn::AdamState<double> actor;
  nn::AdamState<double> critic;

  explicit Optimizers(const PpoConfig& config) : actor(config.actor_lr), critic(config.critic_lr) {}
};

// Clipped-surrogate term of one sample.
double clipped_surrogate(double ratio, double advantage, double clip_eps);

// Columns are samples.
struct Minibatch {
  MatX obs;           // normalized observations
  MatX raw_actions;   // pre-clip samples
  VecX old_log_prob;
  VecX advantages;    // normalized
  VecX returns;
};

// -mean_i min(r_i A_i, clip(r_i) A_i); gradient accumulated into `grad` when
// non-null. `clipped` receives the number of samples whose clipped term is active.
double actor_loss(const Actor& actor, const Minibatch& mb, double clip_eps, Actor* grad = nullptr,
                  long* clipped = nullptr, VecX* ratios = nullptr);
// mean_i (V(s_i) - R_i)^2.
double critic_loss(const Critic& critic, const Minibatch& mb, Critic* grad = nullptr);

// Runs config.epochs_per_batch epochs of minibatch updates. NonFiniteLoss
// aborts before any parameter is touched by the offending minibatch.
UpdateStats ppo_update(PolicyNet& policy, Optimizers& opt, const RolloutBuffer& buffer, const PpoConfig& config,
                       Rng& rng);

struct EpisodeReport {
  int episode = 0;
  int steps = 0;
  double final_distance = 0.0;
  bool goal_reached = false;
  double sum_r_g = 0.0;
  double sum_r_d = 0.0;
  double sum_r_s = 0.0;
  InfractionCounts infractions = InfractionCounts::Zero();
  Vec3 mean_engine = Vec3::Zero();  // torque, power, fuel %
};

// One episode with the given policy; noise drawn from Rng(seed). With
// `deterministic` the clipped mean action is used.
EpisodeReport run_episode(const PolicyNet& policy, ManeuverEnv& env, std::uint64_t seed, bool deterministic,
                          RolloutBuffer* buffer = nullptr);

struct TrainResult {
  PolicyNet policy;
  std::vector<EpisodeReport> episodes;
  std::vector<UpdateStats> updates;
};

using EpisodeCallback = std::function<void(const EpisodeReport&)>;

// Episode i draws its noise from derive_seed(derive_seed(seed, 1), i); the
// initial weights come from derive_seed(seed, 2). Batches of episodes are
// collected (in parallel unless `serial`) with a frozen normalizer, merged in
// episode order, then used for one PPO update; results do not depend on the
// worker count. InvalidArgument if an enabled head lacks its model.
TrainResult train_policy(const sim::Simulator& sim, const reward::DynamicModel* dynamic,
                         const reward::SafetyModel* safety, const PpoConfig& config, std::uint64_t seed,
                         bool serial = false, const EpisodeCallback& on_episode = {});

// Evaluation episodes with stochastic actions, episode i seeded with
// derive_seed(seed, i).
std::vector<EpisodeReport> evaluate_policy(const sim::Simulator& sim, const reward::DynamicModel* dynamic,
                                           const reward::SafetyModel* safety, const PolicyNet& policy,
                                           reward::RewardMask mask, int episodes, std::uint64_t seed,
                                           bool deterministic = false, bool serial = false);

// Tab-separated report, one header line then one row per episode. Lines
// starting with '#' are comments and skipped by read_report.
void write_report(std::ostream& out, const std::vector<EpisodeReport>& episodes);
std::vector<EpisodeReport> read_report(std::istream& in);

// Aggregates over a set of episodes; engine means are per-episode means averaged.
struct ReportSummary {
  int episodes = 0;
  double mean_torque_pct = 0.0;
  double mean_power_pct = 0.0;
  double mean_fuel_pct = 0.0;
  InfractionCounts infractions = InfractionCounts::Zero();
  double goal_reach_rate = 0.0;
  double mean_final_distance = 0.0;
  double median_final_distance = 0.0;

  int total_infractions() const { return infractions.sum(); }
};

ReportSummary summarize(std::span<const EpisodeReport> episodes);
// '# key<TAB>value' lines.
void write_summary(std::ostream& out, const ReportSummary& summary);

}  // namespace opscore::ppo
