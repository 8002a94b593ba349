#pragma once

#include <filesystem>

#include "opscore/nn/dense.hpp"
#include "opscore/nn/lstm.hpp"
#include "opscore/reward/checkpoint.hpp"
#include "opscore/reward/dynamic_model.hpp"
#include "opscore/reward/safety_model.hpp"

namespace opscore {

void add_layer(Checkpoint& ck, const std::string& prefix, const nn::Dense<double>& layer);
void add_layer(Checkpoint& ck, const std::string& prefix, const nn::LstmCell<double>& cell);
// Copies stored parameters into an already-shaped layer (CheckpointLoadError on mismatch).
void read_layer(const Checkpoint& ck, const std::string& prefix, nn::Dense<double>& layer);
void read_layer(const Checkpoint& ck, const std::string& prefix, nn::LstmCell<double>& cell);

}  // namespace opscore

namespace opscore::reward {

Checkpoint to_checkpoint(const DynamicModel& model);
Checkpoint to_checkpoint(const SafetyModel& model);
DynamicModel dynamic_model_from(const Checkpoint& ck);
SafetyModel safety_model_from(const Checkpoint& ck);

DynamicModel load_dynamic_model(const std::filesystem::path& path);
SafetyModel load_safety_model(const std::filesystem::path& path);

}  // namespace opscore::reward
