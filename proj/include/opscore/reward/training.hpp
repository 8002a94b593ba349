#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "opscore/reward/dynamic_model.hpp"
#include "opscore/reward/safety_model.hpp"

namespace opscore::reward {

struct TrainOptions {
  int epochs = 1000;
  int batch_size = 8;
  double learning_rate = 1e-4;
  std::uint64_t seed = 0;
};

struct TrainHistory {
  // Mean per-sample training loss of every epoch.
  std::vector<double> epoch_loss;
};

using EpochCallback = std::function<void(int epoch, double loss)>;

// Fits the dynamic model on raw window pairs; `stats` are stored in the model
// and used to normalize inputs and targets. Shuffling and reparameterization
// noise are drawn from one stream seeded by options.seed.
DynamicModel train_dynamic(const std::vector<WindowPair>& raw_pairs, const FeatureStats& stats,
                           const TrainOptions& options, TrainHistory* history = nullptr,
                           const EpochCallback& on_epoch = {});

// Fits the safety model on raw per-step infraction counts (5 x n).
SafetyModel train_safety(const MatX& raw_counts, const TrainOptions& options, TrainHistory* history = nullptr,
                         const EpochCallback& on_epoch = {});

}  // namespace opscore::reward
