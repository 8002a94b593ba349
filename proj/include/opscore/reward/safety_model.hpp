#pragma once

#include <cstdint>
#include <optional>

#include "opscore/common/types.hpp"
#include "opscore/nn/dense.hpp"
#include "opscore/reward/gaussian.hpp"

namespace opscore::reward {

inline constexpr int kSafetyLatent = 2;
inline constexpr int kSafetyHidden = 8;

using InfractionFeatures = Eigen::Matrix<double, kNumInfractionTypes, 1>;

// Per-feature divisor for infraction counts: the training maximum, at least 1.
struct InfractionScale {
  InfractionFeatures max = InfractionFeatures::Ones();

  static InfractionScale from_counts(const MatX& counts);  // 5 x n
  MatX normalize(const MatX& counts) const;
};

// Two ELU layers (5 -> 8 -> 8), linear mean / log-variance heads (8 -> 2) and
// a linear head (2 -> 1) that regresses the total infraction count from z.
struct SafetyModel {
  nn::Dense<double> hidden1{kNumInfractionTypes, kSafetyHidden, nn::Activation::elu};
  nn::Dense<double> hidden2{kSafetyHidden, kSafetyHidden, nn::Activation::elu};
  nn::Dense<double> mu_head{kSafetyHidden, kSafetyLatent, nn::Activation::identity};
  nn::Dense<double> logvar_head{kSafetyHidden, kSafetyLatent, nn::Activation::identity};
  nn::Dense<double> sum_head{kSafetyLatent, 1, nn::Activation::identity};
  std::optional<InfractionScale> scale;

  static SafetyModel initialized(std::uint64_t seed);

  nn::ParamBlocks<double> parameter_blocks();
};

struct SafetyPosterior {
  MatX mu;
  MatX logvar;
};

// Deterministic posteriors of raw count columns (5 x batch).
SafetyPosterior encode_infractions(const SafetyModel& model, const MatX& raw_counts);

// Mean over the batch of (S - S_hat)^2 + KL(q || N(0, I)) where S is the raw
// total of each column; no reconstruction of the counts themselves.
// NegativeInfraction for negative counts.
double safety_loss(const SafetyModel& model, const MatX& raw_counts, const MatX& noise, SafetyModel* grad = nullptr);

double safety_loss(const SafetyModel& model, const InfractionFeatures& counts, const VecX& noise,
                   SafetyModel* grad = nullptr);

// r_s = 1 - KL(posterior(k) || N(0, I)).
double score_safety(const SafetyModel& model, const InfractionFeatures& counts);
VecX score_safety_batch(const SafetyModel& model, const MatX& raw_counts);

// KL(posterior || prior) for each column; used for evaluation.
VecX safety_kl(const SafetyModel& model, const MatX& raw_counts);

}  // namespace opscore::reward
