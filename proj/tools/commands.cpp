#include "commands.hpp"

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "opscore/common/checksum.hpp"
#include "opscore/common/error.hpp"
#include "opscore/common/stats.hpp"
#include "opscore/dataset/corpus.hpp"
#include "opscore/dataset/scoring.hpp"
#include "opscore/dataset/windows.hpp"
#include "opscore/ppo/ppo.hpp"
#include "opscore/reward/gradcheck_suite.hpp"
#include "opscore/reward/model_io.hpp"
#include "opscore/reward/training.hpp"
#include "opscore/service/server.hpp"
#include "opscore/sim/scenario_io.hpp"
#include "run_manifest.hpp"

namespace opscore::cli {
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) { return fs::path(p.string() + suffix); }

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

sim::Simulator make_sim(const std::string& spec) {
  const auto sc = sim::resolve_scenario(spec);
  return sim::Simulator(sc.excavator, sc.world);
}

void add_scenario_input(RunManifest& m, const std::string& spec) {
  if (!spec.empty() && spec != "reference") m.add_input(spec);
}

std::optional<reward::DynamicModel> load_dyn(const std::string& path, bool required, RunManifest* m) {
  if (path.empty()) {
    if (required) fail(ErrorCode::CheckpointLoadError, "the dynamic head needs --dyn");
    return std::nullopt;
  }
  auto model = reward::load_dynamic_model(path);
  if (m) m->add_input(path);
  return model;
}

std::optional<reward::SafetyModel> load_safety(const std::string& path, bool required, RunManifest* m) {
  if (path.empty()) {
    if (required) fail(ErrorCode::CheckpointLoadError, "the safety head needs --safety");
    return std::nullopt;
  }
  auto model = reward::load_safety_model(path);
  if (m) m->add_input(path);
  return model;
}

// Accepts either a corpus directory or its manifest.json.
dataset::Corpus load_data(const std::string& data, RunManifest& m) {
  fs::path manifest = data;
  if (fs::is_directory(manifest)) manifest /= "manifest.json";
  auto corpus = dataset::load_corpus(manifest);
  m.add_input(manifest);
  for (const auto& e : corpus.manifest.entries) m.add_input(manifest.parent_path() / e.file);
  return corpus;
}

void write_loss_log(const fs::path& path, const std::vector<double>& losses) {
  std::ostringstream out;
  out << "epoch\tloss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) out << i + 1 << '\t' << fmt("%.17g", losses[i]) << '\n';
  write_file(path, out.str());
}

void print_loss_summary(const std::vector<double>& losses) {
  if (losses.empty()) {
    std::cout << "epochs 0: initialized model written, loss log empty\n";
    return;
  }
  std::cout << "epochs " << losses.size() << "  first loss " << fmt("%.6g", losses.front()) << "  final loss "
            << fmt("%.6g", losses.back()) << "  ratio " << fmt("%.4f", losses.back() / losses.front()) << "\n";
}

reward::TrainOptions train_options(const TrainModelArgs& a, std::uint64_t seed) {
  reward::TrainOptions o;
  o.epochs = a.epochs;
  o.batch_size = a.batch;
  o.learning_rate = a.lr;
  o.seed = seed;
  return o;
}

reward::EpochCallback progress(int total) {
  return [total](int epoch, double loss) {
    if (epoch == 1 || epoch % 100 == 0 || epoch == total)
      std::cerr << "epoch " << epoch << "/" << total << "  loss " << fmt("%.6g", loss) << "\n";
  };
}

void print_summary(const ppo::ReportSummary& s) {
  std::cout << "episodes            " << s.episodes << "\n"
            << "avg torque %        " << fmt("%.2f", s.mean_torque_pct) << "\n"
            << "avg power %         " << fmt("%.2f", s.mean_power_pct) << "\n"
            << "avg fuel %          " << fmt("%.2f", s.mean_fuel_pct) << "\n"
            << "total infractions   " << s.total_infractions() << "\n"
            << "goal-reach rate     " << fmt("%.3f", s.goal_reach_rate) << "\n"
            << "mean final dist m   " << fmt("%.3f", s.mean_final_distance) << "\n"
            << "median final dist m " << fmt("%.3f", s.median_final_distance) << "\n";
}

}  // namespace

int run_collect(const CollectArgs& a, const Invocation& inv) {
  const auto seed = resolve_seed(inv.seed_option, a.seed);
  RunManifest manifest(*inv.command, inv.argv);
  manifest.set_seed(seed);
  add_scenario_input(manifest, a.scenario);
  const auto sim = make_sim(a.scenario);

  dataset::CorpusOptions o;
  o.seed = seed.value;
  o.serial = a.serial;
  if (a.controller == "corpus") {
    o.n_expert = a.experts;
    o.n_novice = a.novices;
  } else {
    require(a.episodes >= 0, ErrorCode::InvalidArgument, "--episodes must be non-negative");
    o.require_experts = false;
    o.n_expert = a.controller == "expert" ? a.episodes : 0;
    o.n_novice = a.controller == "novice" ? a.episodes : 0;
  }
  auto corpus = dataset::generate_corpus(o, sim);

  const fs::path dir = a.out;
  fs::create_directories(dir);
  dataset::write_corpus(dir, corpus);
  manifest.add_output(dir / "manifest.json");
  for (const auto& e : corpus.manifest.entries) manifest.add_output(dir / e.file);
  manifest.write(dir / "run_manifest.json");

  int experts = 0;
  std::cout << "session_id   label            split  score    is_expert  goal\n";
  for (const auto& e : corpus.manifest.entries) {
    experts += e.is_expert ? 1 : 0;
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-16s %-6s %-8.1f %-10s %s\n", e.session_id.c_str(),
                  dataset::to_string(e.label).c_str(), dataset::to_string(e.split).c_str(), e.final_score,
                  e.is_expert ? "yes" : "no", e.goal_reached ? "yes" : "no");
    std::cout << line;
  }
  std::cout << "sessions " << corpus.sessions.size() << "  expert-scored " << experts << "  train experts "
            << corpus.manifest.train_experts().size() << "\n";
  return 0;
}

int run_train_dynamic(const TrainModelArgs& a, const Invocation& inv) {
  const auto seed = resolve_seed(inv.seed_option, a.seed);
  RunManifest manifest(*inv.command, inv.argv);
  manifest.set_seed(seed);
  const auto corpus = load_data(a.data, manifest);
  const auto experts = corpus.experts(dataset::Split::train);
  if (experts.size() < 5)
    fail(ErrorCode::InsufficientExperts,
         std::to_string(experts.size()) + " training expert sessions in " + a.data + ", at least 5 required");

  std::vector<reward::WindowPair> pairs;
  for (const auto* log : experts) {
    auto w = dataset::extract_windows(*log);
    pairs.insert(pairs.end(), w.begin(), w.end());
  }
  const auto stats = dataset::telemetry_stats(experts);
  reward::TrainHistory history;
  const auto model = reward::train_dynamic(pairs, stats, train_options(a, seed.value), &history, progress(a.epochs));

  const fs::path out = a.out;
  ensure_parent(out);
  save_checkpoint_file(out, reward::to_checkpoint(model));
  write_loss_log(with_suffix(out, ".loss.tsv"), history.epoch_loss);
  manifest.add_output(out);
  manifest.add_output(with_suffix(out, ".loss.tsv"));
  manifest.set("training_windows", pairs.size());
  manifest.write(with_suffix(out, ".manifest.json"));
  std::cout << "windows " << pairs.size() << " from " << experts.size() << " expert sessions\n";
  print_loss_summary(history.epoch_loss);
  return 0;
}

int run_train_safety(const TrainModelArgs& a, const Invocation& inv) {
  const auto seed = resolve_seed(inv.seed_option, a.seed);
  RunManifest manifest(*inv.command, inv.argv);
  manifest.set_seed(seed);
  const auto corpus = load_data(a.data, manifest);
  const auto sessions = corpus.all(dataset::Split::train);
  const MatX counts = dataset::infraction_columns(sessions);
  require(counts.cols() > 0, ErrorCode::InvalidArgument, "no training steps in " + a.data);
  const bool degenerate = counts.isZero();
  if (degenerate)
    std::cerr << "warning: DegenerateTargets: every per-step infraction vector in the training split is zero\n";

  reward::TrainHistory history;
  const auto model = reward::train_safety(counts, train_options(a, seed.value), &history, progress(a.epochs));

  const fs::path out = a.out;
  ensure_parent(out);
  save_checkpoint_file(out, reward::to_checkpoint(model));
  write_loss_log(with_suffix(out, ".loss.tsv"), history.epoch_loss);
  manifest.add_output(out);
  manifest.add_output(with_suffix(out, ".loss.tsv"));
  manifest.set("training_steps", counts.cols());
  manifest.set("degenerate_targets", degenerate);
  manifest.write(with_suffix(out, ".manifest.json"));
  std::cout << "steps " << counts.cols() << " from " << sessions.size() << " sessions ("
            << (counts.colwise().sum().array() > 0).count() << " with infractions)\n";
  print_loss_summary(history.epoch_loss);
  return 0;
}

int run_train_policy(const TrainPolicyArgs& a, const Invocation& inv) {
  const auto seed = resolve_seed(inv.seed_option, a.seed);
  RunManifest manifest(*inv.command, inv.argv);
  manifest.set_seed(seed);
  add_scenario_input(manifest, a.scenario);

  ppo::PpoConfig config;
  config.mask = reward::RewardMask::parse(a.rewards);
  config.episodes = a.episodes;
  config.actor_lr = a.actor_lr;
  config.critic_lr = a.critic_lr;
  config.validate();
  const auto dyn = config.mask.dynamic ? load_dyn(a.dyn, true, &manifest) : std::nullopt;
  const auto safety = config.mask.safety ? load_safety(a.safety, true, &manifest) : std::nullopt;
  const auto sim = make_sim(a.scenario);

  const auto result = ppo::train_policy(sim, dyn ? &*dyn : nullptr, safety ? &*safety : nullptr, config, seed.value,
                                        a.serial, [&](const ppo::EpisodeReport& r) {
                                          if ((r.episode + 1) % 50 == 0)
                                            std::cerr << "episode " << r.episode + 1 << "/" << a.episodes
                                                      << "  final distance " << fmt("%.2f", r.final_distance)
                                                      << " m  infractions " << r.infractions.sum() << "\n";
                                        });

  const fs::path out = a.out;
  const fs::path report = a.report.empty() ? with_suffix(out, ".report.tsv") : fs::path(a.report);
  ensure_parent(out);
  ensure_parent(report);
  ppo::save_policy(out, result.policy);
  const std::size_t tail = std::min<std::size_t>(10, result.episodes.size());
  const auto final10 = ppo::summarize(std::span(result.episodes).last(tail));
  {
    std::ofstream f(report, std::ios::binary);
    ppo::write_report(f, result.episodes);
    f << "# summary of the final " << tail << " training episodes\n";
    ppo::write_summary(f, final10);
    if (!f) fail(ErrorCode::IoError, "cannot write " + report.string());
  }
  manifest.add_output(out);
  manifest.add_output(report);
  manifest.set("rewards", config.mask.to_string());
  manifest.write(with_suffix(out, ".manifest.json"));
  std::cout << "trained " << result.episodes.size() << " episodes with rewards " << config.mask.to_string()
            << "; final " << tail << " episodes:\n";
  print_summary(final10);
  return 0;
}

int run_eval(const EvalArgs& a, const Invocation& inv) {
  const auto seed = resolve_seed(inv.seed_option, a.seed);
  RunManifest manifest(*inv.command, inv.argv);
  manifest.set_seed(seed);
  add_scenario_input(manifest, a.scenario);
  const auto policy = ppo::load_policy(a.policy);
  manifest.add_input(a.policy);
  const auto dyn = load_dyn(a.dyn, false, &manifest);
  const auto safety = load_safety(a.safety, false, &manifest);
  const reward::RewardMask mask{true, dyn.has_value(), safety.has_value()};
  const auto sim = make_sim(a.scenario);
  require(a.episodes >= 0, ErrorCode::InvalidArgument, "--episodes must be non-negative");

  const auto episodes = ppo::evaluate_policy(sim, dyn ? &*dyn : nullptr, safety ? &*safety : nullptr, policy, mask,
                                             a.episodes, seed.value, true, a.serial);
  const auto summary = ppo::summarize(episodes);
  const fs::path report = a.report;
  ensure_parent(report);
  {
    std::ofstream f(report, std::ios::binary);
    ppo::write_report(f, episodes);
    f << "# deterministic evaluation, " << episodes.size() << " episodes\n";
    ppo::write_summary(f, summary);
    if (!f) fail(ErrorCode::IoError, "cannot write " + report.string());
  }
  manifest.add_output(report);
  manifest.write(with_suffix(report, ".manifest.json"));
  print_summary(summary);
  return 0;
}

int run_score(const ScoreArgs& a, const Invocation& inv) {
  RunManifest manifest(*inv.command, inv.argv);
  const auto log = dataset::read_session(a.session);
  manifest.add_input(a.session);
  const auto dyn = load_dyn(a.dyn, false, &manifest);
  const auto safety = load_safety(a.safety, false, &manifest);
  const std::string scenario = a.scenario.empty() ? log.scenario : a.scenario;
  add_scenario_input(manifest, scenario);
  const auto sim = make_sim(scenario);

  dataset::SessionScorer scorer(sim, dyn ? &*dyn : nullptr, safety ? &*safety : nullptr);
  const auto scores = dataset::score_steps(log, scorer);
  std::ostringstream out;
  out << "t\tr_g\tr_d\tr_s\ttotal\tpadded\tscore_so_far\n";
  std::vector<double> r_d, r_s;
  for (const auto& s : scores) {
    out << s.t << '\t' << fmt("%.17g", s.rewards.r_g) << '\t' << fmt("%.17g", s.rewards.r_d) << '\t'
        << fmt("%.17g", s.rewards.r_s) << '\t' << fmt("%.17g", s.rewards.total) << '\t' << (s.padded ? 1 : 0) << '\t'
        << fmt("%.17g", s.score_so_far) << '\n';
    r_d.push_back(s.rewards.r_d);
    r_s.push_back(s.rewards.r_s);
  }
  const double final_score = dataset::score_session(log, scorer.weights());
  const bool expert = final_score > dataset::kExpertThreshold;
  out << "# session_id\t" << log.session_id << "\n# steps\t" << scores.size() << "\n# rewards\t"
      << scorer.mask().to_string() << "\n# final_score\t" << fmt("%.17g", final_score) << "\n# is_expert\t"
      << (expert ? "true" : "false") << "\n# mean_r_d\t" << fmt("%.17g", r_d.empty() ? 0.0 : mean(r_d))
      << "\n# mean_r_s\t" << fmt("%.17g", r_s.empty() ? 0.0 : mean(r_s)) << "\n";

  const fs::path path = a.out;
  ensure_parent(path);
  write_file(path, out.str());
  manifest.add_output(path);
  manifest.write(with_suffix(path, ".manifest.json"));
  std::cout << "session " << log.session_id << ": " << scores.size() << " steps, final score "
            << fmt("%.1f", final_score) << " (" << (expert ? "expert" : "novice") << ")";
  if (dyn) std::cout << ", mean r_d " << fmt("%.4f", mean(r_d));
  if (safety) std::cout << ", mean r_s " << fmt("%.4f", mean(r_s));
  std::cout << "\n";
  return 0;
}

int run_serve(const ServeArgs& a, const Invocation& inv) {
  RunManifest manifest(*inv.command, inv.argv);
  const auto dyn = load_dyn(a.dyn, false, &manifest);
  const auto safety = load_safety(a.safety, false, &manifest);
  add_scenario_input(manifest, a.scenario);
  require(a.port >= 0 && a.port <= 65535, ErrorCode::InvalidArgument, "--port out of range");

  service::ServiceContext context;
  const auto sc = sim::resolve_scenario(a.scenario);
  context.default_scenario = sc.world.name;
  context.scenarios.emplace(sc.world.name, sim::Simulator(sc.excavator, sc.world));
  context.dynamic = dyn ? &*dyn : nullptr;
  context.safety = safety ? &*safety : nullptr;
  context.record_dir = a.record_dir;
  context.sessions_dir = a.sessions_dir;
  if (!a.record_dir.empty()) {
    fs::create_directories(a.record_dir);
    manifest.write(fs::path(a.record_dir) / "run_manifest.json");
  }

  // Signals are taken by a waiter thread so the server can stop cleanly.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::FeedbackServer server(std::move(context),
                                 {a.address, static_cast<unsigned short>(a.port), a.tick_hz});
  std::cout << "serving ws://" << a.address << ":" << server.port() << "/session at " << a.tick_hz << " Hz"
            << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.run();
  waiter.join();
  return 0;
}

int run_gradcheck(const GradcheckArgs& a, const Invocation& inv) {
  const auto seed = resolve_seed(inv.seed_option, a.seed);
  const auto rows = reward::run_gradcheck_suite(seed.value, a.corrupt);
  std::ostringstream table;
  table << "layer\tparameters\tmax_rel_error\tresult\n";
  bool ok = true;
  for (const auto& r : rows) {
    ok = ok && r.passed();
    table << r.name << '\t' << r.parameters << '\t' << fmt("%.3e", r.max_relative_error) << '\t'
          << (r.passed() ? "pass" : "FAIL") << '\n';
  }
  std::cout << table.str();
  std::cout << (ok ? "all gradients within " : "gradient check failed, tolerance ")
            << fmt("%.0e", reward::kGradCheckTolerance) << "\n";
  if (!a.out.empty()) {
    RunManifest manifest(*inv.command, inv.argv);
    manifest.set_seed(seed);
    ensure_parent(a.out);
    write_file(a.out, table.str());
    manifest.add_output(a.out);
    manifest.write(with_suffix(a.out, ".manifest.json"));
  }
  return ok ? 0 : 1;
}

}  // namespace opscore::cli
