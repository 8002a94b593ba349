#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "opscore/common/types.hpp"
#include "opscore/nn/dense.hpp"
#include "opscore/nn/lstm.hpp"
#include "opscore/reward/gaussian.hpp"

namespace opscore::reward {

inline constexpr int kWindowLength = 32;
inline constexpr int kDynamicLatent = 8;

// kWindowLength consecutive telemetry rows of (torque, power, fuel).
using WindowRows = Eigen::Matrix<double, kWindowLength, kNumDynamicFeatures>;

// Input rows t..t+31 and target rows t+1..t+32 of one trajectory.
struct WindowPair {
  WindowRows input;
  WindowRows target;
};

// z-score statistics of the training telemetry.
struct FeatureStats {
  Vec3 mean = Vec3::Zero();
  Vec3 std = Vec3::Ones();

  WindowRows normalize(const WindowRows& raw) const;
  // Per-feature mean / std over all rows; std floored at 1e-6.
  static FeatureStats from_rows(const MatX& rows);
};

// LSTM encoder (3 -> 8) with linear mean / log-variance heads, and an LSTM
// decoder whose (h0, c0) are set from the latent sample. The decoder is
// teacher-forced on the true previous row and projects its hidden state to
// the next row through `output_head`.
struct DynamicModel {
  nn::LstmCell<double> encoder{kNumDynamicFeatures, kDynamicLatent};
  nn::Dense<double> mu_head{kDynamicLatent, kDynamicLatent, nn::Activation::identity};
  nn::Dense<double> logvar_head{kDynamicLatent, kDynamicLatent, nn::Activation::identity};
  nn::LstmCell<double> decoder{kNumDynamicFeatures, kDynamicLatent};
  nn::Dense<double> output_head{kDynamicLatent, kNumDynamicFeatures, nn::Activation::identity};
  std::optional<FeatureStats> stats;

  static DynamicModel initialized(std::uint64_t seed);

  nn::ParamBlocks<double> parameter_blocks();
};

// Deterministic posteriors for a batch of normalized windows (latent x batch).
struct PosteriorBatch {
  MatX mu;
  MatX logvar;
};
PosteriorBatch encode_windows(const DynamicModel& model, std::span<const WindowRows> normalized);
DiagGaussian encode_window(const DynamicModel& model, const WindowRows& normalized);

// Mean over the batch of  sum_rows ||target - prediction||^2 + KL(q || N(0, I)),
// with z = mu + sigma * noise (noise is latent x batch). When `grad` is
// non-null the gradient of that mean is accumulated into it.
double dynamic_loss(const DynamicModel& model, std::span<const WindowPair> batch, const MatX& noise,
                    DynamicModel* grad = nullptr);

double dynamic_loss(const DynamicModel& model, const WindowRows& input, const WindowRows& target,
                    const VecX& noise, DynamicModel* grad = nullptr);

// r_d = 1 - KL(posterior(window) || N(0, I)) for a raw telemetry window,
// normalized with the model's stored statistics (UnnormalizedInput if absent).
double score_dynamic(const DynamicModel& model, const WindowRows& raw_window);

// Scores many raw windows in one batched pass.
VecX score_dynamic_batch(const DynamicModel& model, std::span<const WindowRows> raw_windows);

}  // namespace opscore::reward
