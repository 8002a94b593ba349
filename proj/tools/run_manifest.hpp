#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opscore/common/json.hpp"

namespace opscore::cli {

// Where the seed of a run came from.
enum class SeedSource { flag, environment, fallback };

struct ResolvedSeed {
  std::uint64_t value = 0;
  SeedSource source = SeedSource::fallback;
};

// --seed if given, else OPSCORE_SEED, else 0. InvalidArgument on a malformed variable.
ResolvedSeed resolve_seed(const CLI::Option* flag, std::uint64_t flag_value);

// Record of one subcommand invocation written next to its outputs: the full
// flag set (defaults included), the seed, and CRC32 checksums of every input
// and output file.
class RunManifest {
 public:
  RunManifest(const CLI::App& command, std::vector<std::string> argv);

  void set_seed(const ResolvedSeed& seed);
  void set(const std::string& key, Json value) { extra_[key] = std::move(value); }
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  Json to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  static Json file_entry(const std::filesystem::path& path);

  std::string command_;
  Json flags_ = Json::object();
  std::vector<std::string> argv_;
  Json seed_;
  Json extra_ = Json::object();
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
};

}  // namespace opscore::cli
