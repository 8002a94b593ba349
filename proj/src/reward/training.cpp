#include "opscore/reward/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "opscore/common/error.hpp"
#include "opscore/common/rng.hpp"
#include "opscore/nn/adam.hpp"

namespace opscore::reward {

namespace {

void check_options(const TrainOptions& o) {
  require(o.epochs >= 0 && o.batch_size > 0 && o.learning_rate > 0, ErrorCode::InvalidArgument,
          "epochs must be non-negative, batch size and learning rate positive");
}

// Runs the shared epoch / minibatch / Adam loop. `step(indices, noise_rng, grad)`
// returns the batch-mean loss and accumulates its gradient into grad.
template <typename Model, typename StepFn>
void fit(Model& model, std::size_t n, const TrainOptions& o, TrainHistory* history, const EpochCallback& on_epoch,
         StepFn&& step) {
  Rng rng(o.seed);
  nn::AdamState<double> adam(o.learning_rate);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= o.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(o.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(o.batch_size));
      std::span<const std::size_t> idx(order.data() + start, end - start);
      Model grad = nn::zeros_like(model);
      const double loss = step(idx, rng, grad);
      if (!std::isfinite(loss)) fail(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch));
      nn::adam_update(model, grad, adam);
      total += loss * static_cast<double>(idx.size());
    }
    const double mean = total / static_cast<double>(n);
    if (history) history->epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
}

}  // namespace

DynamicModel train_dynamic(const std::vector<WindowPair>& raw_pairs, const FeatureStats& stats,
                           const TrainOptions& o, TrainHistory* history, const EpochCallback& on_epoch) {
  check_options(o);
  require(!raw_pairs.empty(), ErrorCode::InvalidArgument, "no training windows");
  std::vector<WindowPair> pairs;
  pairs.reserve(raw_pairs.size());
  for (const auto& p : raw_pairs) pairs.push_back({stats.normalize(p.input), stats.normalize(p.target)});

  DynamicModel model = DynamicModel::initialized(derive_seed(o.seed, 1));
  std::vector<WindowPair> batch;
  fit(model, pairs.size(), o, history, on_epoch, [&](std::span<const std::size_t> idx, Rng& rng, DynamicModel& grad) {
    batch.clear();
    for (auto i : idx) batch.push_back(pairs[i]);
    const MatX noise = standard_normal(rng, kDynamicLatent, static_cast<Eigen::Index>(idx.size()));
    return dynamic_loss(model, batch, noise, &grad);
  });
  model.stats = stats;
  return model;
}

SafetyModel train_safety(const MatX& raw_counts, const TrainOptions& o, TrainHistory* history,
                         const EpochCallback& on_epoch) {
  check_options(o);
  require(raw_counts.rows() == kNumInfractionTypes && raw_counts.cols() > 0, ErrorCode::InvalidArgument,
          "safety training needs a non-empty 5 x n count matrix");
  SafetyModel model = SafetyModel::initialized(derive_seed(o.seed, 1));
  model.scale = InfractionScale::from_counts(raw_counts);
  MatX batch;
  fit(model, static_cast<std::size_t>(raw_counts.cols()), o, history, on_epoch,
      [&](std::span<const std::size_t> idx, Rng& rng, SafetyModel& grad) {
        batch.resize(kNumInfractionTypes, static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k)
          batch.col(static_cast<Eigen::Index>(k)) = raw_counts.col(static_cast<Eigen::Index>(idx[k]));
        const MatX noise = standard_normal(rng, kSafetyLatent, batch.cols());
        return safety_loss(model, batch, noise, &grad);
      });
  return model;
}

}  // namespace opscore::reward
