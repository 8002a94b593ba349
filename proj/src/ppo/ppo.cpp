#include "opscore/ppo/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "opscore/common/error.hpp"
#include "opscore/common/parallel.hpp"
#include "opscore/common/stats.hpp"

namespace opscore::ppo {
namespace {

constexpr std::uint64_t kEpisodeStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kUpdateStream = 3;

template <typename Model>
double grad_norm(Model& grad) {
  double sq = 0.0;
  for (auto block : grad.parameter_blocks())
    for (double v : block) sq += v * v;
  return std::sqrt(sq);
}

template <typename Model>
void clip_grad(Model& grad, double max_norm) {
  const double norm = grad_norm(grad);
  if (max_norm <= 0.0 || norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (auto block : grad.parameter_blocks())
    for (double& v : block) v *= scale;
}

void require_models(const reward::RewardMask& mask, const reward::DynamicModel* dynamic,
                    const reward::SafetyModel* safety) {
  if (mask.empty()) fail(ErrorCode::EmptyMask, "at least one reward head must be enabled");
  if (mask.dynamic && !dynamic) fail(ErrorCode::InvalidArgument, "dynamic head enabled without a dynamic model");
  if (mask.safety && !safety) fail(ErrorCode::InvalidArgument, "safety head enabled without a safety model");
}

}  // namespace

void PpoConfig::validate() const {
  require(gamma > 0.0 && gamma <= 1.0, ErrorCode::InvalidArgument, "gamma must lie in (0, 1]");
  require(gae_lambda >= 0.0 && gae_lambda <= 1.0, ErrorCode::InvalidArgument, "gae_lambda must lie in [0, 1]");
  require(clip_eps > 0.0, ErrorCode::InvalidArgument, "clip_eps must be positive");
  require(epochs_per_batch > 0 && minibatch > 0 && episodes_per_batch > 0, ErrorCode::InvalidArgument,
          "batch sizes must be positive");
  require(actor_lr > 0.0 && critic_lr > 0.0, ErrorCode::InvalidArgument, "learning rates must be positive");
  require(episodes >= 0, ErrorCode::InvalidArgument, "episodes must be non-negative");
}

void RolloutBuffer::append(const RolloutBuffer& other) {
  const std::size_t offset = steps.size();
  steps.insert(steps.end(), other.steps.begin(), other.steps.end());
  for (EpisodeSpan e : other.episodes) {
    e.begin += offset;
    e.end += offset;
    episodes.push_back(e);
  }
}

GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda) {
  if (buffer.steps.empty()) fail(ErrorCode::EmptyBuffer, "compute_gae on an empty buffer");
  const Eigen::Index n = static_cast<Eigen::Index>(buffer.steps.size());
  GaeResult out;
  out.advantages = VecX::Zero(n);
  out.returns = VecX::Zero(n);
  for (const EpisodeSpan& e : buffer.episodes) {
    double next_value = e.bootstrap_value;
    double running = 0.0;
    for (std::size_t i = e.end; i-- > e.begin;) {
      const RolloutStep& s = buffer.steps[i];
      const double delta = s.reward.total + gamma * next_value - s.value;
      running = delta + gamma * lambda * running;
      out.advantages(static_cast<Eigen::Index>(i)) = running;
      next_value = s.value;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) out.returns(i) = out.advantages(i) + buffer.steps[i].value;
  const double mean = out.advantages.mean();
  const double var = (out.advantages.array() - mean).square().mean();
  out.normalized = (out.advantages.array() - mean) / (std::sqrt(var) + 1e-8);
  return out;
}

double clipped_surrogate(double ratio, double advantage, double clip_eps) {
  const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  return std::min(ratio * advantage, clipped * advantage);
}

double actor_loss(const Actor& actor, const Minibatch& mb, double clip_eps, Actor* grad, long* clipped,
                  VecX* ratios) {
  const Eigen::Index M = mb.obs.cols();
  require(M > 0, ErrorCode::EmptyBuffer, "actor_loss: empty minibatch");
  nn::DenseCache<double> a1, a2, a3;
  const MatX& mean = nn::forward(actor.mean_head, nn::forward(actor.l2, nn::forward(actor.l1, mb.obs, a1), a2), a3);
  const VecX log_std = actor.effective_log_std();
  const VecX ratio = (gaussian_log_prob(mb.raw_actions, mean, log_std) - mb.old_log_prob).array().exp();
  if (ratios) *ratios = ratio;

  double loss = 0.0;
  VecX d_logp = VecX::Zero(M);
  for (Eigen::Index k = 0; k < M; ++k) {
    const double a = mb.advantages(k);
    loss -= clipped_surrogate(ratio(k), a, clip_eps);
    const bool clip_active = (a > 0 && ratio(k) > 1.0 + clip_eps) || (a < 0 && ratio(k) < 1.0 - clip_eps);
    if (clip_active) {
      if (clipped) ++*clipped;
    } else {
      d_logp(k) = -ratio(k) * a / static_cast<double>(M);
    }
  }
  loss /= static_cast<double>(M);
  if (!grad) return loss;

  // d log N(a; m, s) / dm = (a - m) / s^2,  d / d log s = (a - m)^2 / s^2 - 1.
  const VecX inv_var = (-2.0 * log_std.array()).exp();
  const MatX diff = mb.raw_actions - mean;
  const MatX d_mean = ((diff.array().colwise() * inv_var.array()).rowwise() * d_logp.transpose().array()).matrix();
  const MatX z2 = (diff.array().square().colwise() * inv_var.array()).matrix();
  for (int j = 0; j < kNumJoints; ++j)
    if (actor.log_std(j) > kLogStdMin && actor.log_std(j) < kLogStdMax)
      grad->log_std(j) += ((z2.row(j).array() - 1.0) * d_logp.transpose().array()).sum();
  MatX d = nn::backward(actor.mean_head, a3, d_mean, grad->mean_head);
  d = nn::backward(actor.l2, a2, d, grad->l2);
  nn::backward(actor.l1, a1, d, grad->l1);
  return loss;
}

double critic_loss(const Critic& critic, const Minibatch& mb, Critic* grad) {
  const Eigen::Index M = mb.obs.cols();
  require(M > 0, ErrorCode::EmptyBuffer, "critic_loss: empty minibatch");
  nn::DenseCache<double> c1, c2, c3;
  const MatX& value = nn::forward(critic.value_head, nn::forward(critic.l2, nn::forward(critic.l1, mb.obs, c1), c2), c3);
  const VecX residual = value.row(0).transpose() - mb.returns;
  const double loss = residual.squaredNorm() / static_cast<double>(M);
  if (!grad) return loss;
  MatX dv = (2.0 / static_cast<double>(M)) * residual.transpose();
  dv = nn::backward(critic.value_head, c3, dv, grad->value_head);
  dv = nn::backward(critic.l2, c2, dv, grad->l2);
  nn::backward(critic.l1, c1, dv, grad->l1);
  return loss;
}

UpdateStats ppo_update(PolicyNet& policy, Optimizers& opt, const RolloutBuffer& buffer, const PpoConfig& config,
                       Rng& rng) {
  const GaeResult gae = compute_gae(buffer, config.gamma, config.gae_lambda);
  const std::size_t n = buffer.steps.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  UpdateStats stats;
  long minibatches = 0, clipped = 0, samples = 0;
  bool first = true;
  Minibatch mb;
  for (int epoch = 0; epoch < config.epochs_per_batch; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.minibatch)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.minibatch));
      const Eigen::Index M = static_cast<Eigen::Index>(stop - start);
      mb.obs.resize(kObservationSize, M);
      mb.raw_actions.resize(kNumJoints, M);
      mb.old_log_prob.resize(M);
      mb.advantages.resize(M);
      mb.returns.resize(M);
      for (Eigen::Index k = 0; k < M; ++k) {
        const std::size_t i = order[start + static_cast<std::size_t>(k)];
        mb.obs.col(k) = buffer.steps[i].obs;
        mb.raw_actions.col(k) = buffer.steps[i].raw_action;
        mb.old_log_prob(k) = buffer.steps[i].log_prob;
        mb.advantages(k) = gae.normalized(static_cast<Eigen::Index>(i));
        mb.returns(k) = gae.returns(static_cast<Eigen::Index>(i));
      }

      Actor ga = nn::zeros_like(policy.actor);
      Critic gc = nn::zeros_like(policy.critic);
      VecX ratios;
      const double a_loss = actor_loss(policy.actor, mb, config.clip_eps, &ga, &clipped, &ratios);
      const double c_loss = critic_loss(policy.critic, mb, &gc);
      if (!std::isfinite(a_loss) || !std::isfinite(c_loss))
        fail(ErrorCode::NonFiniteLoss,
             "ppo_update: actor " + std::to_string(a_loss) + ", critic " + std::to_string(c_loss));
      if (first) {
        stats.first_ratio_max_deviation = (ratios.array() - 1.0).abs().maxCoeff();
        first = false;
      }

      clip_grad(ga, config.max_grad_norm);
      clip_grad(gc, config.max_grad_norm);
      nn::adam_update(policy.actor, ga, opt.actor);
      nn::adam_update(policy.critic, gc, opt.critic);

      stats.actor_loss += a_loss;
      stats.critic_loss += c_loss;
      samples += M;
      ++minibatches;
    }
  }
  if (minibatches > 0) {
    stats.actor_loss /= static_cast<double>(minibatches);
    stats.critic_loss /= static_cast<double>(minibatches);
    stats.clip_fraction = static_cast<double>(clipped) / static_cast<double>(samples);
  }
  return stats;
}

EpisodeReport run_episode(const PolicyNet& policy, ManeuverEnv& env, std::uint64_t seed, bool deterministic,
                          RolloutBuffer* buffer) {
  Rng rng(seed);
  sim::Observation obs = env.reset(seed);
  EpisodeReport rep;
  EpisodeSpan span;
  if (buffer) span.begin = buffer->steps.size();
  bool goal = false;
  while (true) {
    const JointVector noise = deterministic ? JointVector::Zero() : JointVector(standard_normal(rng, kNumJoints));
    const ActionSample a = sample_action(policy, obs, noise);
    const ManeuverEnv::Step st = env.step(a.action);
    if (buffer) {
      RolloutStep s;
      s.raw_obs = obs;
      s.obs = a.normalized_obs;
      s.raw_action = a.raw;
      s.log_prob = a.log_prob;
      s.value = critic_value(policy.critic, a.normalized_obs)(0);
      s.reward = st.reward;
      s.done = st.done;
      buffer->steps.push_back(s);
    }
    rep.sum_r_g += st.raw.r_g;
    rep.sum_r_d += st.raw.r_d;
    rep.sum_r_s += st.raw.r_s;
    rep.mean_engine += env.state().engine.as_vector();
    ++rep.steps;
    obs = st.observation;
    goal = st.goal_reached;
    if (st.done) break;
  }
  rep.mean_engine /= static_cast<double>(rep.steps);
  rep.final_distance = env.goal_distance();
  rep.goal_reached = goal;
  rep.infractions = env.state().infractions_total;
  if (buffer) {
    span.end = buffer->steps.size();
    if (!goal) {
      if (!obs.allFinite()) fail(ErrorCode::NonFiniteObservation, "non-finite bootstrap observation");
      span.bootstrap_value = critic_value(policy.critic, policy.normalizer.normalize(obs))(0);
    }
    buffer->episodes.push_back(span);
  }
  return rep;
}

TrainResult train_policy(const sim::Simulator& sim, const reward::DynamicModel* dynamic,
                         const reward::SafetyModel* safety, const PpoConfig& config, std::uint64_t seed, bool serial,
                         const EpisodeCallback& on_episode) {
  config.validate();
  require_models(config.mask, dynamic, safety);
  TrainResult out;
  out.policy = PolicyNet::initialized(derive_seed(seed, kInitStream));
  // Centre the normalizer on the start pose until real statistics arrive.
  {
    ManeuverEnv env(sim, dynamic, safety, config.mask);
    out.policy.normalizer.mean = env.reset(0);
  }
  Optimizers opt(config);
  Rng update_rng(derive_seed(seed, kUpdateStream));
  const std::uint64_t episode_base = derive_seed(seed, kEpisodeStream);

  for (int first = 0; first < config.episodes; first += config.episodes_per_batch) {
    const int count = std::min(config.episodes_per_batch, config.episodes - first);
    std::vector<RolloutBuffer> parts(static_cast<std::size_t>(count));
    std::vector<EpisodeReport> reports(static_cast<std::size_t>(count));
    parallel_for(
        static_cast<std::size_t>(count),
        [&](std::size_t k) {
          ManeuverEnv env(sim, dynamic, safety, config.mask);
          const int episode = first + static_cast<int>(k);
          reports[k] = run_episode(out.policy, env, derive_seed(episode_base, static_cast<std::uint64_t>(episode)),
                                   false, &parts[k]);
          reports[k].episode = episode;
        },
        serial);

    RolloutBuffer buffer;
    for (const auto& p : parts) buffer.append(p);
    for (const auto& r : reports) {
      out.episodes.push_back(r);
      if (on_episode) on_episode(r);
    }
    out.updates.push_back(ppo_update(out.policy, opt, buffer, config, update_rng));

    MatX raw(kObservationSize, static_cast<Eigen::Index>(buffer.size()));
    for (std::size_t i = 0; i < buffer.size(); ++i) raw.col(static_cast<Eigen::Index>(i)) = buffer.steps[i].raw_obs;
    out.policy.normalizer.update(raw);
  }
  return out;
}

std::vector<EpisodeReport> evaluate_policy(const sim::Simulator& sim, const reward::DynamicModel* dynamic,
                                           const reward::SafetyModel* safety, const PolicyNet& policy,
                                           reward::RewardMask mask, int episodes, std::uint64_t seed,
                                           bool deterministic, bool serial) {
  require(episodes >= 0, ErrorCode::InvalidArgument, "episodes must be non-negative");
  std::vector<EpisodeReport> reports(static_cast<std::size_t>(episodes));
  parallel_for(
      reports.size(),
      [&](std::size_t i) {
        ManeuverEnv env(sim, dynamic, safety, mask);
        reports[i] = run_episode(policy, env, derive_seed(seed, i), deterministic);
        reports[i].episode = static_cast<int>(i);
      },
      serial);
  return reports;
}

namespace {
constexpr const char* kReportHeader =
    "episode\tsteps\tfinal_distance_m\tgoal_reached\tsum_r_g\tsum_r_d\tsum_r_s\tpole_touched\tpole_fell\t"
    "env_collision\tball_knocked\tequipment_collision\ttorque_pct\tpower_pct\tfuel_pct";
}

void write_report(std::ostream& out, const std::vector<EpisodeReport>& episodes) {
  out << kReportHeader << '\n';
  char buf[512];
  for (const EpisodeReport& r : episodes) {
    std::snprintf(buf, sizeof buf, "%d\t%d\t%.9g\t%d\t%.9g\t%.9g\t%.9g\t%d\t%d\t%d\t%d\t%d\t%.9g\t%.9g\t%.9g\n",
                  r.episode, r.steps, r.final_distance, r.goal_reached ? 1 : 0, r.sum_r_g, r.sum_r_d, r.sum_r_s,
                  r.infractions(0), r.infractions(1), r.infractions(2), r.infractions(3), r.infractions(4),
                  r.mean_engine(0), r.mean_engine(1), r.mean_engine(2));
    out << buf;
  }
}

std::vector<EpisodeReport> read_report(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) fail(ErrorCode::ParseError, "report: unexpected header");
  std::vector<EpisodeReport> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream row(line);
    EpisodeReport r;
    int goal = 0;
    row >> r.episode >> r.steps >> r.final_distance >> goal >> r.sum_r_g >> r.sum_r_d >> r.sum_r_s;
    for (int i = 0; i < kNumInfractionTypes; ++i) row >> r.infractions(i);
    row >> r.mean_engine(0) >> r.mean_engine(1) >> r.mean_engine(2);
    if (!row) fail(ErrorCode::ParseError, "report line " + std::to_string(line_no) + ": malformed row");
    r.goal_reached = goal != 0;
    out.push_back(r);
  }
  return out;
}

ReportSummary summarize(std::span<const EpisodeReport> episodes) {
  ReportSummary s;
  s.episodes = static_cast<int>(episodes.size());
  if (episodes.empty()) return s;
  std::vector<double> distances;
  int reached = 0;
  Vec3 engine = Vec3::Zero();
  for (const auto& e : episodes) {
    engine += e.mean_engine;
    s.infractions += e.infractions;
    reached += e.goal_reached ? 1 : 0;
    distances.push_back(e.final_distance);
  }
  const double n = static_cast<double>(episodes.size());
  engine /= n;
  s.mean_torque_pct = engine(0);
  s.mean_power_pct = engine(1);
  s.mean_fuel_pct = engine(2);
  s.goal_reach_rate = reached / n;
  s.mean_final_distance = opscore::mean(distances);
  s.median_final_distance = opscore::median(distances);
  return s;
}

void write_summary(std::ostream& out, const ReportSummary& s) {
  char buf[64];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    out << "# " << key << '\t' << buf << '\n';
  };
  line("episodes", s.episodes);
  line("avg_torque_pct", s.mean_torque_pct);
  line("avg_power_pct", s.mean_power_pct);
  line("avg_fuel_pct", s.mean_fuel_pct);
  line("total_infractions", s.total_infractions());
  line("goal_reach_rate", s.goal_reach_rate);
  line("mean_final_distance_m", s.mean_final_distance);
  line("median_final_distance_m", s.median_final_distance);
}

}  // namespace opscore::ppo
