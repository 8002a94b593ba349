#pragma once

#include <cstdint>
#include <filesystem>

#include "opscore/common/types.hpp"
#include "opscore/nn/dense.hpp"
#include "opscore/reward/checkpoint.hpp"
#include "opscore/sim/types.hpp"

namespace opscore::ppo {

inline constexpr int kHidden = 64;
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kInitialLogStd = -0.5;

struct Actor {
  nn::Dense<double> l1{kObservationSize, kHidden, nn::Activation::elu};
  nn::Dense<double> l2{kHidden, kHidden, nn::Activation::elu};
  nn::Dense<double> mean_head{kHidden, kNumJoints, nn::Activation::identity};
  VecX log_std = VecX::Constant(kNumJoints, kInitialLogStd);

  nn::ParamBlocks<double> parameter_blocks();
  // log_std clamped to [kLogStdMin, kLogStdMax].
  VecX effective_log_std() const;
};

struct Critic {
  nn::Dense<double> l1{kObservationSize, kHidden, nn::Activation::elu};
  nn::Dense<double> l2{kHidden, kHidden, nn::Activation::elu};
  nn::Dense<double> value_head{kHidden, 1, nn::Activation::identity};

  nn::ParamBlocks<double> parameter_blocks();
};

// Running per-feature mean / variance of raw observations (Chan et al.
// parallel merge). Normalized values are clipped to +-10.
struct ObsNormalizer {
  VecX mean = VecX::Zero(kObservationSize);
  VecX var = VecX::Ones(kObservationSize);
  double count = 0.0;

  // Columns are observations.
  void update(const MatX& batch);
  MatX normalize(const MatX& raw) const;
};

struct PolicyNet {
  Actor actor;
  Critic critic;
  ObsNormalizer normalizer;

  static PolicyNet initialized(std::uint64_t seed);
};

// Actor means and critic values for normalized observations (columns).
MatX actor_mean(const Actor& actor, const MatX& normalized);
VecX critic_value(const Critic& critic, const MatX& normalized);

// Diagonal Gaussian log-density of each column of `raw` actions.
VecX gaussian_log_prob(const MatX& raw, const MatX& mean, const VecX& log_std);

struct ActionSample {
  JointVector action;  // clipped to [-1, 1]
  JointVector raw;     // pre-clip sample
  double log_prob = 0.0;
  sim::Observation normalized_obs;
};

// raw = mean + sigma * noise; log_prob is of the pre-clip sample.
// NonFiniteObservation on NaN/inf input.
ActionSample sample_action(const PolicyNet& policy, const sim::Observation& obs, const JointVector& noise);

Checkpoint to_checkpoint(const PolicyNet& policy);
PolicyNet policy_from(const Checkpoint& ck);
void save_policy(const std::filesystem::path& path, const PolicyNet& policy);
PolicyNet load_policy(const std::filesystem::path& path);

}  // namespace opscore::ppo
