#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace opscore::cli {

// Everything a subcommand needs besides its own flags.
struct Invocation {
  const CLI::App* command = nullptr;
  std::vector<std::string> argv;
  const CLI::Option* seed_option = nullptr;
};

struct CollectArgs {
  std::string controller = "corpus";
  int episodes = 10;
  int experts = 7;
  int novices = 33;
  std::string scenario = "reference";
  std::uint64_t seed = 0;
  std::string out;
  bool serial = false;
};

struct TrainModelArgs {
  std::string data;
  int epochs = 1000;
  int batch = 8;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  std::string out;
  bool serial = false;
};

struct TrainPolicyArgs {
  std::string rewards = "task";
  std::string dyn;
  std::string safety;
  int episodes = 500;
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  std::string scenario = "reference";
  std::uint64_t seed = 0;
  std::string out;
  std::string report;
  bool serial = false;
};

struct EvalArgs {
  std::string policy;
  int episodes = 10;
  std::string dyn;
  std::string safety;
  std::string scenario = "reference";
  std::uint64_t seed = 0;
  std::string report;
  bool serial = false;
};

struct ScoreArgs {
  std::string session;
  std::string dyn;
  std::string safety;
  std::string scenario;
  std::string out;
};

struct ServeArgs {
  std::string address = "127.0.0.1";
  int port = 8765;
  std::string scenario = "reference";
  std::string dyn;
  std::string safety;
  double tick_hz = 10.0;
  std::string record_dir;
  std::string sessions_dir = ".";
};

struct GradcheckArgs {
  std::uint64_t seed = 0;
  std::string out;
  bool corrupt = false;
};

int run_collect(const CollectArgs& args, const Invocation& inv);
int run_train_dynamic(const TrainModelArgs& args, const Invocation& inv);
int run_train_safety(const TrainModelArgs& args, const Invocation& inv);
int run_train_policy(const TrainPolicyArgs& args, const Invocation& inv);
int run_eval(const EvalArgs& args, const Invocation& inv);
int run_score(const ScoreArgs& args, const Invocation& inv);
int run_serve(const ServeArgs& args, const Invocation& inv);
int run_gradcheck(const GradcheckArgs& args, const Invocation& inv);

}  // namespace opscore::cli
