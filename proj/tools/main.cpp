#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "opscore/common/error.hpp"

using namespace opscore::cli;

namespace {

CLI::Option* add_seed(CLI::App* sub, std::uint64_t& seed) {
  return sub->add_option("--seed", seed, "Random seed (falls back to OPSCORE_SEED, then 0)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Excavator operator-scoring workbench"};
  app.name("opscore");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  const std::vector<std::string> args(argv, argv + argc);

  CollectArgs collect;
  auto* c = app.add_subcommand("collect", "Generate scripted demonstration sessions");
  c->add_option("--controller", collect.controller, "corpus (experts + novices), expert or novice")
      ->check(CLI::IsMember({"corpus", "expert", "novice"}));
  auto* c_episodes = c->add_option("--episodes", collect.episodes, "Sessions for --controller expert|novice");
  c->add_option("--experts", collect.experts, "Expert sessions in corpus mode");
  c->add_option("--novices", collect.novices, "Novice sessions in corpus mode");
  c->add_option("--scenario", collect.scenario, "'reference' or a scenario file");
  auto* c_seed = add_seed(c, collect.seed);
  c->add_option("--out", collect.out, "Output directory")->required();
  c->add_flag("--serial", collect.serial, "Single-threaded");

  TrainModelArgs dynamic;
  auto* d = app.add_subcommand("train-dynamic", "Train the dynamic-distribution model on expert telemetry");
  d->add_option("--data", dynamic.data, "Corpus directory or manifest")->required();
  d->add_option("--epochs", dynamic.epochs);
  d->add_option("--batch", dynamic.batch);
  d->add_option("--lr", dynamic.lr);
  auto* d_seed = add_seed(d, dynamic.seed);
  d->add_option("--out", dynamic.out, "Checkpoint path")->required();
  d->add_flag("--serial", dynamic.serial, "Accepted for uniformity; training is single-threaded");

  TrainModelArgs safety;
  auto* s = app.add_subcommand("train-safety", "Train the safety-distribution model on infraction counts");
  s->add_option("--data", safety.data, "Corpus directory or manifest")->required();
  s->add_option("--epochs", safety.epochs);
  s->add_option("--batch", safety.batch);
  s->add_option("--lr", safety.lr);
  auto* s_seed = add_seed(s, safety.seed);
  s->add_option("--out", safety.out, "Checkpoint path")->required();
  s->add_flag("--serial", safety.serial, "Accepted for uniformity; training is single-threaded");

  TrainPolicyArgs policy;
  auto* p = app.add_subcommand("train-policy", "Train a PPO policy on the selected reward heads");
  p->add_option("--rewards", policy.rewards, "Comma-separated subset of task,dynamic,safety");
  p->add_option("--dyn", policy.dyn, "Dynamic model checkpoint");
  p->add_option("--safety", policy.safety, "Safety model checkpoint");
  p->add_option("--episodes", policy.episodes);
  p->add_option("--actor-lr", policy.actor_lr);
  p->add_option("--critic-lr", policy.critic_lr);
  p->add_option("--scenario", policy.scenario);
  auto* p_seed = add_seed(p, policy.seed);
  p->add_option("--out", policy.out, "Policy checkpoint path")->required();
  p->add_option("--report", policy.report, "Training report (default <out>.report.tsv)");
  p->add_flag("--serial", policy.serial, "Single-threaded episode collection");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Deterministic evaluation of a policy");
  e->add_option("--policy", eval.policy)->required();
  e->add_option("--episodes", eval.episodes);
  e->add_option("--dyn", eval.dyn, "Optional dynamic model for r_d sums");
  e->add_option("--safety", eval.safety, "Optional safety model for r_s sums");
  e->add_option("--scenario", eval.scenario);
  auto* e_seed = add_seed(e, eval.seed);
  e->add_option("--report", eval.report)->required();
  e->add_flag("--serial", eval.serial, "Single-threaded");

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "Per-step rewards and final score of a recorded session");
  sc->add_option("--session", score.session)->required();
  sc->add_option("--dyn", score.dyn);
  sc->add_option("--safety", score.safety);
  sc->add_option("--scenario", score.scenario, "Override the scenario named in the session");
  sc->add_option("--out", score.out)->required();

  ServeArgs serve;
  auto* sv = app.add_subcommand("serve", "Live feedback service on ws://ADDRESS:PORT/session");
  sv->add_option("--address", serve.address);
  sv->add_option("--port", serve.port, "0 picks a free port");
  sv->add_option("--scenario", serve.scenario);
  sv->add_option("--dyn-checkpoint", serve.dyn);
  sv->add_option("--safety-checkpoint", serve.safety);
  sv->add_option("--tick-hz", serve.tick_hz);
  sv->add_option("--record-dir", serve.record_dir, "Where finished live sessions are written");
  sv->add_option("--sessions-dir", serve.sessions_dir, "Where replay looks up <session_id>.jsonl");

  GradcheckArgs grad;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  auto* g_seed = add_seed(g, grad.seed);
  g->add_option("--out", grad.out, "Also write the table here");
  g->add_flag("--corrupt", grad.corrupt)->group("");

  try {
    app.parse(argc, argv);
    if (c->parsed() && collect.controller == "corpus" && c_episodes->count() > 0)
      throw CLI::ValidationError("--episodes", "applies to --controller expert|novice; use --experts/--novices");
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c->parsed()) return run_collect(collect, {c, args, c_seed});
    if (d->parsed()) return run_train_dynamic(dynamic, {d, args, d_seed});
    if (s->parsed()) return run_train_safety(safety, {s, args, s_seed});
    if (p->parsed()) return run_train_policy(policy, {p, args, p_seed});
    if (e->parsed()) return run_eval(eval, {e, args, e_seed});
    if (sc->parsed()) return run_score(score, {sc, args, nullptr});
    if (sv->parsed()) return run_serve(serve, {sv, args, nullptr});
    if (g->parsed()) return run_gradcheck(grad, {g, args, g_seed});
  } catch (const opscore::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 2;
}
