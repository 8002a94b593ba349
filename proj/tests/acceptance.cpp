// Acceptance runner: one PASS/FAIL line per primary criterion. Exits 1 if any
// selected criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include <CLI11.hpp>

#include "opscore/common/checksum.hpp"
#include "opscore/common/rng.hpp"
#include "opscore/common/stats.hpp"
#include "opscore/dataset/corpus.hpp"
#include "opscore/dataset/windows.hpp"
#include "opscore/ppo/ppo.hpp"
#include "opscore/reward/gaussian.hpp"
#include "opscore/reward/gradcheck_suite.hpp"
#include "opscore/reward/training.hpp"
#include "opscore/sim/kinematics.hpp"
#include "opscore/sim/scenario_io.hpp"
#include "oracles.hpp"

using namespace opscore;
namespace fs = std::filesystem;

namespace {

// Pinned thresholds.
constexpr double kGradTol = 1e-4;
constexpr double kKlTol = 1e-6;
constexpr double kFkTol = 1e-9;
constexpr double kAucMin = 0.9;
constexpr double kLossRatioMax = 0.2;
constexpr double kSpearmanMin = 0.8;
constexpr double kPaperD0 = 10.2;
constexpr double kDistanceFraction = 0.2;
// Expert engine band, percent: torque, power, fuel.
constexpr double kBandLo[3] = {24.0, 10.0, 3.0};
constexpr double kBandHi[3] = {34.0, 20.0, 5.0};

using Clock = std::chrono::steady_clock;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Options {
  std::vector<int> only;
  int dynamic_epochs = 1000;
  int safety_epochs = 1000;
  int policy_episodes = 500;
  int eval_episodes = 10;
  std::uint64_t seed = 0;
  std::string cli;
  std::string workdir;
  bool serial = false;
};

// Shared artefacts, built on first use.
struct Context {
  const Options& opt;
  sim::ScenarioFile scenario = sim::reference_scenario();
  sim::Simulator sim{scenario.excavator, scenario.world};
  std::optional<dataset::Corpus> corpus;
  std::optional<reward::DynamicModel> dynamic;
  std::optional<reward::SafetyModel> safety;
  reward::TrainHistory dynamic_history;
  reward::TrainHistory safety_history;
  std::optional<ppo::TrainResult> task_run;
  std::optional<ppo::TrainResult> shaped_run;

  explicit Context(const Options& o) : opt(o) {}

  const dataset::Corpus& get_corpus() {
    if (!corpus) {
      dataset::CorpusOptions co;
      co.seed = opt.seed;
      co.serial = opt.serial;
      corpus = dataset::generate_corpus(co, sim);
    }
    return *corpus;
  }

  const reward::DynamicModel& get_dynamic() {
    if (!dynamic) {
      const auto experts = get_corpus().experts(dataset::Split::train);
      std::vector<reward::WindowPair> pairs;
      for (const auto* log : experts) {
        auto w = dataset::extract_windows(*log);
        pairs.insert(pairs.end(), w.begin(), w.end());
      }
      reward::TrainOptions to;
      to.epochs = opt.dynamic_epochs;
      to.seed = opt.seed;
      std::cerr << "training dynamic model (" << pairs.size() << " windows, " << to.epochs << " epochs)\n";
      dynamic = reward::train_dynamic(pairs, dataset::telemetry_stats(experts), to, &dynamic_history,
                                      [](int e, double l) {
                                        if (e % 100 == 0) std::cerr << "  epoch " << e << " loss " << l << "\n";
                                      });
    }
    return *dynamic;
  }

  const reward::SafetyModel& get_safety() {
    if (!safety) {
      const MatX counts = dataset::infraction_columns(get_corpus().all(dataset::Split::train));
      reward::TrainOptions to;
      to.epochs = opt.safety_epochs;
      to.seed = opt.seed;
      std::cerr << "training safety model (" << counts.cols() << " steps, " << to.epochs << " epochs)\n";
      safety = reward::train_safety(counts, to, &safety_history);
    }
    return *safety;
  }

  ppo::TrainResult train(reward::RewardMask mask) {
    ppo::PpoConfig config;
    config.mask = mask;
    config.episodes = opt.policy_episodes;
    const reward::DynamicModel* d = mask.dynamic ? &get_dynamic() : nullptr;
    const reward::SafetyModel* s = mask.safety ? &get_safety() : nullptr;
    std::cerr << "training policy with rewards " << mask.to_string() << " (" << config.episodes << " episodes)\n";
    return ppo::train_policy(sim, d, s, config, opt.seed, opt.serial);
  }

  const ppo::TrainResult& get_task_run() {
    if (!task_run) task_run = train({true, false, false});
    return *task_run;
  }
  const ppo::TrainResult& get_shaped_run() {
    if (!shaped_run) shaped_run = train(reward::RewardMask::all());
    return *shaped_run;
  }
};

Outcome gradient_correctness(Context&) {
  const auto t0 = Clock::now();
  const auto rows = reward::run_gradcheck_suite(0);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  std::string names;
  for (const auto& r : rows) {
    worst = std::max(worst, r.max_relative_error);
    names += (names.empty() ? "" : ",") + r.name;
  }
  return {worst < kGradTol && elapsed < 60.0, "max rel err " + fmt("%.2e", worst) + " < " + fmt("%.0e", kGradTol) +
                                                  " over " + names + " in " + fmt("%.1f", elapsed) + " s (< 60 s)"};
}

Outcome kl_oracle(Context&) {
  Rng rng(derive_seed(0, 2));
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dims = 1 + static_cast<int>(rng() % 8);
    reward::DiagGaussian q{VecX(dims), VecX(dims)};
    double expected = 0.0;
    for (int d = 0; d < dims; ++d) {
      q.mu(d) = uniform(rng, -3.0, 3.0);
      q.logvar(d) = uniform(rng, -2.0, 2.0);
      expected += oracle::kl_quadrature(q.mu(d), q.logvar(d));
    }
    worst = std::max(worst, std::abs(reward::kl_diag_gaussian_vs_standard(q) - expected));
  }
  return {worst < kKlTol, "100 Gaussians, max |closed form - quadrature| " + fmt("%.2e", worst) + " < " +
                              fmt("%.0e", kKlTol)};
}

Outcome fk_oracle(Context& ctx) {
  Rng rng(derive_seed(0, 3));
  const auto& c = ctx.scenario.excavator;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    JointVector q;
    for (int j = 0; j < kNumJoints; ++j) q(j) = uniform(rng, c.joint_min(j), c.joint_max(j));
    worst = std::max(worst, (sim::forward_kinematics(q, c).bucket_tip - oracle::transform_chain_bucket_tip(q, c)).norm());
  }
  return {worst < kFkTol, "1000 poses, max tip error " + fmt("%.2e", worst) + " m < " + fmt("%.0e", kFkTol) + " m"};
}

Outcome expert_novice_separation(Context& ctx) {
  const auto t0 = Clock::now();
  const auto& model = ctx.get_dynamic();
  const auto& corpus = ctx.get_corpus();
  std::vector<double> pos, neg;
  for (const auto* log : corpus.experts(dataset::Split::eval)) {
    const VecX r = reward::score_dynamic_batch(model, dataset::input_windows(*log));
    pos.insert(pos.end(), r.data(), r.data() + r.size());
  }
  for (const auto* log : corpus.novices(dataset::Split::eval)) {
    const VecX r = reward::score_dynamic_batch(model, dataset::input_windows(*log));
    neg.insert(neg.end(), r.data(), r.data() + r.size());
  }
  const double auc = roc_auc(pos, neg);
  const auto& loss = ctx.dynamic_history.epoch_loss;
  const double ratio = loss.empty() ? 1.0 : loss.back() / loss.front();
  return {auc >= kAucMin && ratio <= kLossRatioMax,
          "ROC-AUC " + fmt("%.4f", auc) + " (>= " + fmt("%.1f", kAucMin) + ", " + std::to_string(pos.size()) +
              " expert vs " + std::to_string(neg.size()) + " novice windows), final/first loss " +
              fmt("%.4f", ratio) + " (<= " + fmt("%.1f", kLossRatioMax) + "), " +
              std::to_string(ctx.opt.dynamic_epochs) + " epochs seed " + std::to_string(ctx.opt.seed) + ", " +
              fmt("%.0f", seconds_since(t0)) + " s"};
}

Outcome safety_fidelity(Context& ctx) {
  const auto& model = ctx.get_safety();
  const MatX held_out = dataset::infraction_columns(ctx.get_corpus().all(dataset::Split::eval));
  const VecX kl = reward::safety_kl(model, held_out);
  std::vector<double> s, k;
  for (Eigen::Index i = 0; i < held_out.cols(); ++i) {
    s.push_back(held_out.col(i).sum());
    k.push_back(kl(i));
  }
  const double rho = spearman(s, k);
  const auto nonzero = std::count_if(s.begin(), s.end(), [](double v) { return v > 0; });
  return {rho >= kSpearmanMin, "Spearman(S_t, KL) " + fmt("%.4f", rho) + " (>= " + fmt("%.1f", kSpearmanMin) +
                                   ") on " + std::to_string(s.size()) + " held-out steps (" +
                                   std::to_string(nonzero) + " with infractions)"};
}

double band_distance(double v, int metric) {
  if (v < kBandLo[metric]) return kBandLo[metric] - v;
  if (v > kBandHi[metric]) return v - kBandHi[metric];
  return 0.0;
}

Outcome table5_direction(Context& ctx) {
  const auto& task = ctx.get_task_run();
  const auto& shaped = ctx.get_shaped_run();
  auto evaluate = [&](const ppo::PolicyNet& policy) {
    return ppo::summarize(ppo::evaluate_policy(ctx.sim, nullptr, nullptr, policy, {true, false, false},
                                               ctx.opt.eval_episodes, derive_seed(ctx.opt.seed, 7), true,
                                               ctx.opt.serial));
  };
  const auto et = evaluate(task.policy);
  const auto es = evaluate(shaped.policy);
  const bool fewer = es.total_infractions() < et.total_infractions();

  const double vt[3] = {et.mean_torque_pct, et.mean_power_pct, et.mean_fuel_pct};
  const double vs[3] = {es.mean_torque_pct, es.mean_power_pct, es.mean_fuel_pct};
  int closer = 0;
  std::string engine;
  const char* names[3] = {"torque", "power", "fuel"};
  for (int m = 0; m < 3; ++m) {
    const double dt = band_distance(vt[m], m), ds = band_distance(vs[m], m);
    closer += ds < dt ? 1 : 0;
    engine += std::string(m ? ", " : "") + names[m] + " " + fmt("%.1f", vt[m]) + "->" + fmt("%.1f", vs[m]) +
              " (band gap " + fmt("%.2f", dt) + "->" + fmt("%.2f", ds) + ")";
  }
  auto tail = [](const ppo::TrainResult& r) {
    const std::size_t n = std::min<std::size_t>(10, r.episodes.size());
    return ppo::summarize(std::span(r.episodes).last(n));
  };
  return {fewer && closer >= 2,
          "eval infractions task " + std::to_string(et.total_infractions()) + " vs shaped " +
              std::to_string(es.total_infractions()) + " over " + std::to_string(ctx.opt.eval_episodes) +
              " deterministic episodes (need strictly fewer); engine closer to band on " + std::to_string(closer) +
              "/3 (need 2): " + engine + "; training final-10 infractions task " +
              std::to_string(tail(task).total_infractions()) + " vs shaped " +
              std::to_string(tail(shaped).total_infractions()) + "; " + std::to_string(ctx.opt.policy_episodes) +
              " episodes seed " + std::to_string(ctx.opt.seed)};
}

Outcome goal_completion(Context& ctx) {
  const auto& run = ctx.get_task_run();
  const std::size_t n = std::min<std::size_t>(20, run.episodes.size());
  const auto s = ppo::summarize(std::span(run.episodes).last(n));
  const double limit = kDistanceFraction * kPaperD0;
  return {n == 20 && s.median_final_distance < limit,
          "task-only run, median final distance over last " + std::to_string(n) + " episodes " +
              fmt("%.3f", s.median_final_distance) + " m < " + fmt("%.2f", limit) + " m"};
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Output checksums recorded in a run manifest, keyed by path relative to the run directory.
std::vector<std::pair<std::string, std::string>> output_checksums(const fs::path& manifest, const fs::path& root) {
  const Json j = Json::parse(read_file(manifest));
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : j.at("outputs"))
    out.emplace_back(fs::relative(root / e.at("path").get<std::string>(), root).string(),
                     e.at("crc32").get<std::string>());
  return out;
}

Outcome determinism(Context& ctx) {
  if (ctx.opt.cli.empty()) return {false, "no --cli binary given"};
  const fs::path base = ctx.opt.workdir.empty()
                            ? fs::temp_directory_path() / ("opscore_acceptance_" + std::to_string(::getpid()))
                            : fs::path(ctx.opt.workdir);
  const std::vector<std::pair<std::string, std::string>> steps = {
      {"collect", "collect --seed 3 --out corpus --serial"},
      {"train-dynamic", "train-dynamic --data corpus --epochs 3 --seed 3 --out dyn.ckpt --serial"},
      {"train-safety", "train-safety --data corpus --epochs 3 --seed 3 --out safety.ckpt --serial"},
      {"train-policy",
       "train-policy --rewards task,dynamic,safety --dyn dyn.ckpt --safety safety.ckpt --episodes 8 --seed 3 "
       "--out policy.bin --serial"},
      {"eval", "eval --policy policy.bin --episodes 3 --seed 3 --report eval.tsv --serial"},
  };
  const std::vector<std::string> manifests = {"corpus/run_manifest.json", "dyn.ckpt.manifest.json",
                                              "safety.ckpt.manifest.json", "policy.bin.manifest.json",
                                              "eval.tsv.manifest.json"};
  const fs::path cli = fs::absolute(ctx.opt.cli);
  std::vector<std::vector<std::pair<std::string, std::string>>> runs[2];
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path dir = base / ("run" + std::to_string(rep));
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const int code = shell("cd '" + dir.string() + "' && '" + cli.string() + "' " + steps[i].second +
                             " >/dev/null 2>&1");
      if (code != 0) return {false, steps[i].first + " exited with " + std::to_string(code)};
      runs[rep].push_back(output_checksums(dir / manifests[i], dir));
    }
  }
  int files = 0;
  std::string mismatched;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (runs[0][i] != runs[1][i]) mismatched += (mismatched.empty() ? "" : ",") + steps[i].first;
    files += static_cast<int>(runs[0][i].size());
  }
  fs::remove_all(base);
  return {mismatched.empty(), std::to_string(files) + " output checksums across " + std::to_string(steps.size()) +
                                  " subcommands, two --serial runs" +
                                  (mismatched.empty() ? ": all equal" : ": differ in " + mismatched)};
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Acceptance criteria runner"};
  app.add_option("--only", opt.only, "Run only these criteria (1-8)");
  app.add_option("--dynamic-epochs", opt.dynamic_epochs);
  app.add_option("--safety-epochs", opt.safety_epochs);
  app.add_option("--policy-episodes", opt.policy_episodes);
  app.add_option("--eval-episodes", opt.eval_episodes);
  app.add_option("--seed", opt.seed);
  app.add_option("--cli", opt.cli, "Path to the opscore binary (criterion 8)");
  app.add_option("--workdir", opt.workdir, "Scratch directory for criterion 8");
  app.add_flag("--serial", opt.serial);
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome(Context&)>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"KL oracle", kl_oracle},
      {"FK oracle", fk_oracle},
      {"expert/novice separation", expert_novice_separation},
      {"safety-model fidelity", safety_fidelity},
      {"Table 5 direction", table5_direction},
      {"goal completion", goal_completion},
      {"determinism", determinism},
  };

  Context ctx(opt);
  int failed = 0;
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    lines.push_back(std::string(o.pass ? "PASS" : "FAIL") + "  " + std::to_string(id) + " " + criteria[i].first +
                    ": " + o.detail);
    std::cout << lines.back() << std::endl;
  }
  std::cout << "\nsummary\n";
  for (const auto& l : lines) std::cout << l << "\n";
  return failed == 0 ? 0 : 1;
}
