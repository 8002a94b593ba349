#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "opscore/common/json.hpp"
#include "opscore/dataset/controllers.hpp"
#include "opscore/dataset/session.hpp"

namespace opscore::dataset {

inline constexpr int kCorpusSchemaVersion = 1;

enum class Split { train, eval };

struct CorpusOptions {
  int n_expert = 7;
  int n_novice = 33;
  int train_experts = 5;
  int eval_experts = 2;
  // Fraction of novice sessions assigned to training (for the safety model).
  double novice_train_fraction = 0.7;
  std::uint64_t seed = 0;
  ScoringWeights weights;
  bool serial = false;
  // When false, any expert / novice counts are accepted (single-controller collections).
  bool require_experts = true;
};

struct CorpusEntry {
  std::string session_id;
  std::string file;
  ControllerLabel label = ControllerLabel::human;
  std::uint64_t seed = 0;
  double final_score = 0.0;
  bool is_expert = false;
  bool goal_reached = false;
  Split split = Split::train;
  std::string checksum;
};

struct CorpusManifest {
  std::uint64_t seed = 0;
  std::string scenario;
  std::vector<CorpusEntry> entries;

  std::vector<std::string> train_experts() const;
  std::vector<std::string> eval_experts() const;
};

struct Corpus {
  CorpusManifest manifest;
  std::vector<SessionLog> sessions;  // same order as manifest.entries

  // Scripted experts designated for training / evaluation.
  std::vector<const SessionLog*> experts(Split split) const;
  // Every non-designated-expert session of a split.
  std::vector<const SessionLog*> novices(Split split) const;
  std::vector<const SessionLog*> all(Split split) const;
};

// Generates the sessions. Experts are scripted-expert runs scoring above the
// expert threshold; the first `train_experts` of them train, the next
// `eval_experts` are held out. InsufficientExperts if too few qualify.
Corpus generate_corpus(const CorpusOptions& options, const sim::Simulator& sim);

// Writes <dir>/<session_id>.jsonl for every session and <dir>/manifest.json.
void write_corpus(const std::filesystem::path& dir, Corpus& corpus);

// Reads a manifest and its sessions; IoError on checksum mismatch.
Corpus load_corpus(const std::filesystem::path& manifest_path);

Json to_json(const CorpusManifest& manifest);
CorpusManifest manifest_from_json(const Json& j);

std::string to_string(Split split);

}  // namespace opscore::dataset
