#include "opscore/reward/model_io.hpp"

#include "opscore/common/error.hpp"

namespace opscore {

void add_layer(Checkpoint& ck, const std::string& prefix, const nn::Dense<double>& layer) {
  ck.blocks.push_back(CheckpointBlock::of(prefix + ".weights", layer.weights));
  ck.blocks.push_back(CheckpointBlock::of(prefix + ".bias", layer.bias));
}

void add_layer(Checkpoint& ck, const std::string& prefix, const nn::LstmCell<double>& cell) {
  ck.blocks.push_back(CheckpointBlock::of(prefix + ".weights", cell.weights));
  ck.blocks.push_back(CheckpointBlock::of(prefix + ".bias", cell.bias));
}

void read_layer(const Checkpoint& ck, const std::string& prefix, nn::Dense<double>& layer) {
  layer.weights = ck.block(prefix + ".weights", layer.weights.rows(), layer.weights.cols()).matrix();
  layer.bias = ck.block(prefix + ".bias", layer.bias.rows(), 1).matrix();
}

void read_layer(const Checkpoint& ck, const std::string& prefix, nn::LstmCell<double>& cell) {
  cell.weights = ck.block(prefix + ".weights", cell.weights.rows(), cell.weights.cols()).matrix();
  cell.bias = ck.block(prefix + ".bias", cell.bias.rows(), 1).matrix();
}

}  // namespace opscore

namespace opscore::reward {
namespace {

void expect_kind(const Checkpoint& ck, const std::string& kind) {
  if (ck.kind != kind) fail(ErrorCode::CheckpointLoadError, "expected a " + kind + " checkpoint, got " + ck.kind);
}

}  // namespace

Checkpoint to_checkpoint(const DynamicModel& model) {
  Checkpoint ck;
  ck.kind = "dynamic";
  ck.meta = {{"window", kWindowLength}, {"features", kNumDynamicFeatures}, {"latent", kDynamicLatent}};
  add_layer(ck, "encoder", model.encoder);
  add_layer(ck, "mu_head", model.mu_head);
  add_layer(ck, "logvar_head", model.logvar_head);
  add_layer(ck, "decoder", model.decoder);
  add_layer(ck, "output_head", model.output_head);
  if (model.stats) {
    ck.blocks.push_back(CheckpointBlock::of("stats.mean", model.stats->mean));
    ck.blocks.push_back(CheckpointBlock::of("stats.std", model.stats->std));
  }
  return ck;
}

DynamicModel dynamic_model_from(const Checkpoint& ck) {
  expect_kind(ck, "dynamic");
  DynamicModel m;
  read_layer(ck, "encoder", m.encoder);
  read_layer(ck, "mu_head", m.mu_head);
  read_layer(ck, "logvar_head", m.logvar_head);
  read_layer(ck, "decoder", m.decoder);
  read_layer(ck, "output_head", m.output_head);
  if (ck.has_block("stats.mean")) {
    FeatureStats s;
    s.mean = ck.block("stats.mean", 3, 1).matrix();
    s.std = ck.block("stats.std", 3, 1).matrix();
    m.stats = s;
  }
  return m;
}

Checkpoint to_checkpoint(const SafetyModel& model) {
  Checkpoint ck;
  ck.kind = "safety";
  ck.meta = {{"features", kNumInfractionTypes}, {"hidden", kSafetyHidden}, {"latent", kSafetyLatent}};
  add_layer(ck, "hidden1", model.hidden1);
  add_layer(ck, "hidden2", model.hidden2);
  add_layer(ck, "mu_head", model.mu_head);
  add_layer(ck, "logvar_head", model.logvar_head);
  add_layer(ck, "sum_head", model.sum_head);
  if (model.scale) ck.blocks.push_back(CheckpointBlock::of("stats.max", model.scale->max));
  return ck;
}

SafetyModel safety_model_from(const Checkpoint& ck) {
  expect_kind(ck, "safety");
  SafetyModel m;
  read_layer(ck, "hidden1", m.hidden1);
  read_layer(ck, "hidden2", m.hidden2);
  read_layer(ck, "mu_head", m.mu_head);
  read_layer(ck, "logvar_head", m.logvar_head);
  read_layer(ck, "sum_head", m.sum_head);
  if (ck.has_block("stats.max")) {
    InfractionScale s;
    s.max = ck.block("stats.max", kNumInfractionTypes, 1).matrix();
    m.scale = s;
  }
  return m;
}

DynamicModel load_dynamic_model(const std::filesystem::path& path) {
  return dynamic_model_from(load_checkpoint_file(path));
}

SafetyModel load_safety_model(const std::filesystem::path& path) {
  return safety_model_from(load_checkpoint_file(path));
}

}  // namespace opscore::reward
