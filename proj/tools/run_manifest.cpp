#include "run_manifest.hpp"

#include <cstdlib>

#include "opscore/common/checksum.hpp"
#include "opscore/common/error.hpp"

namespace opscore::cli {

inline constexpr int kRunManifestSchemaVersion = 1;

ResolvedSeed resolve_seed(const CLI::Option* flag, std::uint64_t flag_value) {
  if (flag && flag->count() > 0) return {flag_value, SeedSource::flag};
  if (const char* env = std::getenv("OPSCORE_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    require(*end == '\0' && env[0] != '-', ErrorCode::InvalidArgument,
            std::string("OPSCORE_SEED is not a non-negative integer: '") + env + "'");
    return {v, SeedSource::environment};
  }
  return {0, SeedSource::fallback};
}

RunManifest::RunManifest(const CLI::App& command, std::vector<std::string> argv)
    : command_(command.get_name()), argv_(std::move(argv)) {
  for (const CLI::Option* opt : command.get_options()) {
    if (opt->get_name() == "--help" || opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (opt->get_expected_max() == 0) {
      flags_[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& r = opt->results();
      flags_[name] = r.size() == 1 ? Json(r.front()) : Json(r);
    } else {
      flags_[name] = opt->get_default_str();
    }
  }
}

void RunManifest::set_seed(const ResolvedSeed& seed) {
  static const char* names[] = {"flag", "OPSCORE_SEED", "default"};
  seed_ = {{"value", seed.value}, {"source", names[static_cast<int>(seed.source)]}};
  flags_["seed"] = std::to_string(seed.value);
}

void RunManifest::add_input(const std::filesystem::path& path) { inputs_.push_back(path); }
void RunManifest::add_output(const std::filesystem::path& path) { outputs_.push_back(path); }

Json RunManifest::file_entry(const std::filesystem::path& path) {
  return {{"path", path.string()}, {"crc32", file_checksum(path)}};
}

Json RunManifest::to_json() const {
  Json j;
  j["schema_version"] = kRunManifestSchemaVersion;
  j["command"] = command_;
  j["argv"] = argv_;
  j["flags"] = flags_;
  j["seed"] = seed_;
  Json in = Json::array();
  for (const auto& p : inputs_) in.push_back(file_entry(p));
  Json out = Json::array();
  for (const auto& p : outputs_) out.push_back(file_entry(p));
  j["inputs"] = std::move(in);
  j["outputs"] = std::move(out);
  for (auto it = extra_.begin(); it != extra_.end(); ++it) j[it.key()] = it.value();
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const { write_file(path, to_json().dump(2) + "\n"); }

}  // namespace opscore::cli
