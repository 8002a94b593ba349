#include "opscore/ppo/policy.hpp"

#include <cmath>

#include "opscore/common/error.hpp"
#include "opscore/common/rng.hpp"
#include "opscore/reward/model_io.hpp"

namespace opscore::ppo {

nn::ParamBlocks<double> Actor::parameter_blocks() {
  nn::ParamBlocks<double> out;
  for (auto* layer : {&l1, &l2, &mean_head})
    for (auto b : layer->parameter_blocks()) out.push_back(b);
  out.push_back(nn::block_of<double>(log_std));
  return out;
}

VecX Actor::effective_log_std() const { return log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax); }

nn::ParamBlocks<double> Critic::parameter_blocks() {
  nn::ParamBlocks<double> out;
  for (auto* layer : {&l1, &l2, &value_head})
    for (auto b : layer->parameter_blocks()) out.push_back(b);
  return out;
}

void ObsNormalizer::update(const MatX& batch) {
  if (batch.cols() == 0) return;
  const double n = static_cast<double>(batch.cols());
  const VecX batch_mean = batch.rowwise().mean();
  const VecX batch_var = (batch.colwise() - batch_mean).array().square().rowwise().sum() / n;
  const double total = count + n;
  const VecX delta = batch_mean - mean;
  mean += delta * (n / total);
  var = (var * count + batch_var * n + delta.array().square().matrix() * (count * n / total)) / total;
  count = total;
}

MatX ObsNormalizer::normalize(const MatX& raw) const {
  const VecX inv_std = (var.array() + 1e-8).sqrt().inverse();
  return ((raw.colwise() - mean).array().colwise() * inv_std.array()).cwiseMax(-10.0).cwiseMin(10.0).matrix();
}

PolicyNet PolicyNet::initialized(std::uint64_t seed) {
  Rng rng(seed);
  PolicyNet p;
  p.actor.l1.initialize(rng);
  p.actor.l2.initialize(rng);
  p.actor.mean_head.initialize(rng);
  // Small initial means so early exploration is governed by the std.
  p.actor.mean_head.weights *= 0.01;
  p.actor.mean_head.bias.setZero();
  p.critic.l1.initialize(rng);
  p.critic.l2.initialize(rng);
  p.critic.value_head.initialize(rng);
  return p;
}

MatX actor_mean(const Actor& actor, const MatX& normalized) {
  return nn::forward(actor.mean_head, nn::forward(actor.l2, nn::forward(actor.l1, normalized)));
}

VecX critic_value(const Critic& critic, const MatX& normalized) {
  return nn::forward(critic.value_head, nn::forward(critic.l2, nn::forward(critic.l1, normalized))).row(0).transpose();
}

VecX gaussian_log_prob(const MatX& raw, const MatX& mean, const VecX& log_std) {
  const VecX inv_sigma = (-log_std.array()).exp();
  const MatX z = ((raw - mean).array().colwise() * inv_sigma.array()).matrix();
  const double constant = -log_std.sum() - 0.5 * static_cast<double>(log_std.size()) * std::log(2.0 * M_PI);
  return (-0.5 * z.colwise().squaredNorm().array() + constant).transpose();
}

ActionSample sample_action(const PolicyNet& policy, const sim::Observation& obs, const JointVector& noise) {
  if (!obs.allFinite()) fail(ErrorCode::NonFiniteObservation, "policy observation contains NaN or inf");
  ActionSample s;
  s.normalized_obs = policy.normalizer.normalize(obs);
  const VecX mean = actor_mean(policy.actor, s.normalized_obs);
  const VecX log_std = policy.actor.effective_log_std();
  s.raw = mean + (log_std.array().exp() * noise.array()).matrix();
  s.action = s.raw.cwiseMax(-1.0).cwiseMin(1.0);
  s.log_prob = gaussian_log_prob(s.raw, mean, log_std)(0);
  return s;
}

Checkpoint to_checkpoint(const PolicyNet& policy) {
  Checkpoint ck;
  ck.kind = "policy";
  ck.meta = {{"observation", kObservationSize}, {"hidden", kHidden}, {"actions", kNumJoints},
             {"normalizer_count", policy.normalizer.count}};
  add_layer(ck, "actor.l1", policy.actor.l1);
  add_layer(ck, "actor.l2", policy.actor.l2);
  add_layer(ck, "actor.mean_head", policy.actor.mean_head);
  ck.blocks.push_back(CheckpointBlock::of("actor.log_std", policy.actor.log_std));
  add_layer(ck, "critic.l1", policy.critic.l1);
  add_layer(ck, "critic.l2", policy.critic.l2);
  add_layer(ck, "critic.value_head", policy.critic.value_head);
  ck.blocks.push_back(CheckpointBlock::of("normalizer.mean", policy.normalizer.mean));
  ck.blocks.push_back(CheckpointBlock::of("normalizer.var", policy.normalizer.var));
  return ck;
}

PolicyNet policy_from(const Checkpoint& ck) {
  if (ck.kind != "policy") fail(ErrorCode::CheckpointLoadError, "expected a policy checkpoint, got " + ck.kind);
  PolicyNet p;
  read_layer(ck, "actor.l1", p.actor.l1);
  read_layer(ck, "actor.l2", p.actor.l2);
  read_layer(ck, "actor.mean_head", p.actor.mean_head);
  p.actor.log_std = ck.block("actor.log_std", kNumJoints, 1).matrix();
  read_layer(ck, "critic.l1", p.critic.l1);
  read_layer(ck, "critic.l2", p.critic.l2);
  read_layer(ck, "critic.value_head", p.critic.value_head);
  p.normalizer.mean = ck.block("normalizer.mean", kObservationSize, 1).matrix();
  p.normalizer.var = ck.block("normalizer.var", kObservationSize, 1).matrix();
  p.normalizer.count = ck.meta.value("normalizer_count", 0.0);
  return p;
}

void save_policy(const std::filesystem::path& path, const PolicyNet& policy) {
  save_checkpoint_file(path, to_checkpoint(policy));
}

PolicyNet load_policy(const std::filesystem::path& path) { return policy_from(load_checkpoint_file(path)); }

}  // namespace opscore::ppo
