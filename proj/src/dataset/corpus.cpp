#include "opscore/dataset/corpus.hpp"

#include <cmath>

#include "opscore/common/checksum.hpp"
#include "opscore/common/error.hpp"
#include "opscore/common/parallel.hpp"
#include "opscore/common/rng.hpp"

namespace opscore::dataset {

namespace {

constexpr std::uint64_t kNoviceStream = 1000;

std::string numbered(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%02d", prefix, i);
  return buf;
}

bool designated_expert(const CorpusEntry& e) {
  return e.label == ControllerLabel::expert_scripted && e.is_expert;
}

}  // namespace

std::string to_string(Split split) { return split == Split::train ? "train" : "eval"; }

std::vector<std::string> CorpusManifest::train_experts() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (designated_expert(e) && e.split == Split::train) out.push_back(e.session_id);
  return out;
}

std::vector<std::string> CorpusManifest::eval_experts() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (designated_expert(e) && e.split == Split::eval) out.push_back(e.session_id);
  return out;
}

std::vector<const SessionLog*> Corpus::experts(Split split) const {
  std::vector<const SessionLog*> out;
  for (std::size_t i = 0; i < sessions.size(); ++i)
    if (designated_expert(manifest.entries[i]) && manifest.entries[i].split == split) out.push_back(&sessions[i]);
  return out;
}

std::vector<const SessionLog*> Corpus::novices(Split split) const {
  std::vector<const SessionLog*> out;
  for (std::size_t i = 0; i < sessions.size(); ++i)
    if (manifest.entries[i].label != ControllerLabel::expert_scripted && manifest.entries[i].split == split)
      out.push_back(&sessions[i]);
  return out;
}

std::vector<const SessionLog*> Corpus::all(Split split) const {
  std::vector<const SessionLog*> out;
  for (std::size_t i = 0; i < sessions.size(); ++i)
    if (manifest.entries[i].split == split) out.push_back(&sessions[i]);
  return out;
}

Corpus generate_corpus(const CorpusOptions& o, const sim::Simulator& sim) {
  const int needed = o.train_experts + o.eval_experts;
  require(o.n_novice >= 0 && o.n_expert >= 0 && o.train_experts >= 0 && o.eval_experts >= 0,
          ErrorCode::InvalidArgument, "invalid corpus counts");
  require(needed > 0 || !o.require_experts, ErrorCode::InvalidArgument, "invalid corpus counts");
  if (o.require_experts && o.n_expert < needed)
    fail(ErrorCode::InsufficientExperts,
         std::to_string(o.n_expert) + " expert sessions requested, " + std::to_string(needed) + " required");
  o.weights.validate();

  const std::size_t total = static_cast<std::size_t>(o.n_expert + o.n_novice);
  Corpus corpus;
  corpus.manifest.seed = o.seed;
  corpus.manifest.scenario = sim.scenario().name;
  corpus.sessions.resize(total);
  std::vector<bool> diverged(total, false);

  parallel_for(
      total,
      [&](std::size_t i) {
        const bool expert = i < static_cast<std::size_t>(o.n_expert);
        const int index = expert ? static_cast<int>(i) : static_cast<int>(i) - o.n_expert;
        const std::uint64_t seed = derive_seed(o.seed, expert ? index : kNoviceStream + index);
        SessionLog log;
        try {
          log = run_scripted_controller(expert ? ControllerKind::expert : ControllerKind::novice, sim, seed, o.weights);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::ControllerDiverged) throw;
          log = run_controller(sample_params(ControllerKind::expert, seed), ControllerLabel::expert_scripted, sim,
                               seed, o.weights);
          diverged[i] = true;
        }
        log.session_id = numbered(expert ? "expert" : "novice", index);
        corpus.sessions[i] = std::move(log);
      },
      o.serial);

  int qualified = 0;
  const int novice_train = static_cast<int>(std::lround(o.novice_train_fraction * o.n_novice));
  for (std::size_t i = 0; i < total; ++i) {
    const SessionLog& s = corpus.sessions[i];
    CorpusEntry e;
    e.session_id = s.session_id;
    e.file = s.session_id + ".jsonl";
    e.label = s.label;
    e.seed = s.seed;
    e.final_score = s.final_score;
    e.is_expert = s.is_expert && !diverged[i];
    e.goal_reached = s.goal_reached;
    if (s.label == ControllerLabel::expert_scripted) {
      if (e.is_expert) {
        e.split = qualified < o.train_experts ? Split::train : Split::eval;
        ++qualified;
      } else {
        e.split = Split::eval;
      }
    } else {
      e.split = static_cast<int>(i) - o.n_expert < novice_train ? Split::train : Split::eval;
    }
    corpus.manifest.entries.push_back(std::move(e));
  }
  if (o.require_experts && qualified < needed)
    fail(ErrorCode::InsufficientExperts, std::to_string(qualified) + " scripted experts scored above " +
                                             std::to_string(kExpertThreshold) + ", " + std::to_string(needed) +
                                             " required");
  return corpus;
}

Json to_json(const CorpusManifest& m) {
  Json j;
  j["schema_version"] = kCorpusSchemaVersion;
  j["seed"] = m.seed;
  j["scenario"] = m.scenario;
  j["train_experts"] = m.train_experts();
  j["eval_experts"] = m.eval_experts();
  Json sessions = Json::array();
  for (const auto& e : m.entries) {
    sessions.push_back({{"session_id", e.session_id},
                        {"file", e.file},
                        {"label", to_string(e.label)},
                        {"seed", e.seed},
                        {"final_score", e.final_score},
                        {"is_expert", e.is_expert},
                        {"goal_reached", e.goal_reached},
                        {"split", to_string(e.split)},
                        {"checksum", e.checksum}});
  }
  j["sessions"] = std::move(sessions);
  return j;
}

CorpusManifest manifest_from_json(const Json& j) {
  CorpusManifest m;
  try {
    if (j.at("schema_version").get<int>() != kCorpusSchemaVersion)
      fail(ErrorCode::VersionMismatch, "corpus schema_version " + j.at("schema_version").dump());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.scenario = j.value("scenario", std::string("reference"));
    for (const auto& s : j.at("sessions")) {
      CorpusEntry e;
      e.session_id = s.at("session_id").get<std::string>();
      e.file = s.at("file").get<std::string>();
      e.label = parse_label(s.at("label").get<std::string>());
      e.seed = s.at("seed").get<std::uint64_t>();
      e.final_score = s.at("final_score").get<double>();
      e.is_expert = s.at("is_expert").get<bool>();
      e.goal_reached = s.value("goal_reached", false);
      const auto split = s.at("split").get<std::string>();
      if (split != "train" && split != "eval") fail(ErrorCode::ParseError, "unknown split '" + split + "'");
      e.split = split == "train" ? Split::train : Split::eval;
      e.checksum = s.value("checksum", std::string());
      m.entries.push_back(std::move(e));
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, std::string("corpus manifest: ") + e.what());
  }
  return m;
}

void write_corpus(const std::filesystem::path& dir, Corpus& corpus) {
  for (std::size_t i = 0; i < corpus.sessions.size(); ++i) {
    const std::string text = session_to_jsonl(corpus.sessions[i]);
    auto& entry = corpus.manifest.entries[i];
    write_file(dir / entry.file, text);
    entry.checksum = to_hex(crc32_of(text));
  }
  write_file(dir / "manifest.json", to_json(corpus.manifest).dump(2) + "\n");
}

Corpus load_corpus(const std::filesystem::path& manifest_path) {
  Json j;
  try {
    j = Json::parse(read_file(manifest_path));
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, manifest_path.string() + ": " + e.what());
  }
  Corpus corpus;
  corpus.manifest = manifest_from_json(j);
  const auto dir = manifest_path.parent_path();
  for (const auto& e : corpus.manifest.entries) {
    const std::string text = read_file(dir / e.file);
    if (!e.checksum.empty() && to_hex(crc32_of(text)) != e.checksum)
      fail(ErrorCode::IoError, "checksum mismatch for " + e.file);
    corpus.sessions.push_back(session_from_jsonl(text));
  }
  return corpus;
}

}  // namespace opscore::dataset
