#include <doctest.h>

#include <cmath>
#include <cstring>

#include "opscore/common/checksum.hpp"
#include "opscore/common/rng.hpp"
#include "opscore/nn/gradcheck.hpp"
#include "opscore/reward/checkpoint.hpp"
#include "opscore/reward/model_io.hpp"
#include "opscore/reward/rewards.hpp"
#include "opscore/sim/scenario_io.hpp"
#include "oracles.hpp"

using namespace opscore;
using namespace opscore::reward;

namespace {

using oracle::kl_quadrature;

WindowRows random_window(Rng& rng) {
  WindowRows w;
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = uniform(rng, -1.5, 1.5);
  return w;
}

DynamicModel zero_dynamic_model() {
  DynamicModel m;
  m.stats = FeatureStats{};
  return m;
}

void expect_code(auto&& fn, ErrorCode code) {
  try {
    fn();
    FAIL("expected " << to_string(code));
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

void put_u32(std::string& s, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  s.append(b, 4);
}

}  // namespace

TEST_CASE("KL examples") {
  CHECK(kl_diag_gaussian_vs_standard({VecX::Zero(8), VecX::Zero(8)}) == 0.0);
  CHECK(kl_diag_gaussian_vs_standard({(VecX(2) << 1, 0).finished(), VecX::Zero(2)}) == doctest::Approx(0.5));
}

TEST_CASE("KL matches numerical quadrature") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    DiagGaussian q{VecX(8), VecX(8)};
    double expected = 0.0;
    for (int d = 0; d < 8; ++d) {
      q.mu(d) = uniform(rng, -2.0, 2.0);
      q.logvar(d) = uniform(rng, -1.5, 1.5);
      expected += kl_quadrature(q.mu(d), q.logvar(d));
    }
    CHECK(std::abs(kl_diag_gaussian_vs_standard(q) - expected) < 1e-6);
  }
}

TEST_CASE("KL input validation") {
  expect_code([] { kl_diag_gaussian_vs_standard({VecX::Zero(3), VecX::Zero(2)}); }, ErrorCode::ShapeMismatch);
  expect_code([] { kl_diag_gaussian_vs_standard({VecX::Constant(2, NAN), VecX::Zero(2)}); }, ErrorCode::NonFiniteInput);
}

TEST_CASE("KL columns agree with the single-posterior form and are non-negative") {
  Rng rng(12);
  MatX mu(8, 6), lv(8, 6);
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    mu.data()[i] = uniform(rng, -1, 1);
    lv.data()[i] = uniform(rng, -1, 1);
  }
  const VecX kl = kl_columns(mu, lv);
  for (int c = 0; c < 6; ++c) {
    CHECK(kl(c) >= 0.0);
    CHECK(kl(c) == doctest::Approx(kl_diag_gaussian_vs_standard({mu.col(c), lv.col(c)})));
  }
}

TEST_CASE("dynamic loss vanishes for a perfect decoder and prior posterior") {
  DynamicModel m;
  const Vec3 row(0.25, -0.5, 1.0);
  m.output_head.bias = row;
  WindowRows target = row.transpose().replicate<kWindowLength, 1>();
  Rng rng(13);
  const WindowRows input = random_window(rng);
  CHECK(dynamic_loss(m, input, target, VecX::Zero(kDynamicLatent)) == 0.0);
}

TEST_CASE("dynamic loss of an untrained model is finite and positive") {
  Rng rng(14);
  const auto m = DynamicModel::initialized(3);
  std::vector<WindowPair> batch{{random_window(rng), random_window(rng)}, {random_window(rng), random_window(rng)}};
  const double l = dynamic_loss(m, batch, standard_normal(rng, kDynamicLatent, 2));
  CHECK(std::isfinite(l));
  CHECK(l > 0.0);
}

TEST_CASE("dynamic ELBO gradient passes a finite-difference check") {
  Rng rng(15);
  auto m = DynamicModel::initialized(4);
  std::vector<WindowPair> batch;
  for (int b = 0; b < 2; ++b) batch.push_back({random_window(rng), random_window(rng)});
  const MatX noise = standard_normal(rng, kDynamicLatent, 2);
  auto loss = [&](const DynamicModel& model, DynamicModel* grad) { return dynamic_loss(model, batch, noise, grad); };
  const auto r = nn::grad_check(m, loss, 1e-5);
  CHECK(r.parameters_checked == nn::parameter_count(m));
  CHECK(r.max_relative_error < 1e-4);
}

TEST_CASE("batched and single-window dynamic losses agree") {
  Rng rng(16);
  const auto m = DynamicModel::initialized(5);
  std::vector<WindowPair> batch;
  for (int b = 0; b < 3; ++b) batch.push_back({random_window(rng), random_window(rng)});
  const MatX noise = standard_normal(rng, kDynamicLatent, 3);
  double mean = 0.0;
  for (int b = 0; b < 3; ++b) mean += dynamic_loss(m, batch[b].input, batch[b].target, noise.col(b)) / 3.0;
  CHECK(dynamic_loss(m, batch, noise) == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("score_dynamic") {
  Rng rng(17);
  const WindowRows w = random_window(rng);
  CHECK(score_dynamic(zero_dynamic_model(), w) == 1.0);

  auto m = DynamicModel::initialized(6);
  expect_code([&] { score_dynamic(m, w); }, ErrorCode::UnnormalizedInput);
  m.stats = FeatureStats{Vec3(0.1, 0.2, 0.3), Vec3(2.0, 1.0, 0.5)};
  const double a = score_dynamic(m, w);
  CHECK(a == score_dynamic(m, w));
  CHECK(a <= 1.0);
  std::vector<WindowRows> ws{w, random_window(rng)};
  const VecX batch = score_dynamic_batch(m, ws);
  CHECK(batch(0) == doctest::Approx(a).epsilon(1e-12));
  CHECK(batch(1) == doctest::Approx(score_dynamic(m, ws[1])).epsilon(1e-12));
}

TEST_CASE("feature stats") {
  MatX rows(4, 3);
  rows << 1, 5, 2, 3, 5, 2, 5, 5, 2, 7, 5, 2;
  const auto s = FeatureStats::from_rows(rows);
  CHECK(s.mean(0) == doctest::Approx(4.0));
  CHECK(s.std(0) == doctest::Approx(std::sqrt(5.0)));
  CHECK(s.std(1) == doctest::Approx(1e-6));
}

TEST_CASE("safety loss examples") {
  SafetyModel m;
  CHECK(safety_loss(m, InfractionFeatures(InfractionFeatures::Zero()), VecX(VecX::Zero(kSafetyLatent))) == 0.0);
  InfractionFeatures k;
  k << 1, 2, 0, 1, 0;
  CHECK(k.sum() == 4.0);
  // Zero network: S_hat = 0 and the posterior is the prior, so the loss is S^2.
  CHECK(safety_loss(m, k, VecX(VecX::Zero(kSafetyLatent))) == doctest::Approx(16.0));
  expect_code([&] { safety_loss(m, InfractionFeatures(InfractionFeatures::Constant(-1.0)), VecX(VecX::Zero(2))); }, ErrorCode::NegativeInfraction);
}

TEST_CASE("safety loss gradient passes a finite-difference check") {
  Rng rng(18);
  auto m = SafetyModel::initialized(7);
  m.scale = InfractionScale::from_counts((MatX(5, 2) << 3, 0, 1, 1, 0, 0, 2, 1, 0, 4).finished());
  MatX counts(5, 3);
  counts << 0, 1, 3, 0, 0, 1, 0, 0, 0, 2, 1, 0, 0, 0, 1;
  const MatX noise = standard_normal(rng, kSafetyLatent, 3);
  auto loss = [&](const SafetyModel& model, SafetyModel* grad) { return safety_loss(model, counts, noise, grad); };
  CHECK(nn::grad_check(m, loss, 1e-5).max_relative_error < 1e-4);
}

TEST_CASE("infraction scale floors at one") {
  const auto s = InfractionScale::from_counts((MatX(5, 2) << 3, 0, 0, 0, 0, 0, 2, 5, 0, 0).finished());
  CHECK(s.max == (InfractionFeatures() << 3, 1, 1, 5, 1).finished());
}

TEST_CASE("score_safety is deterministic and bounded") {
  auto m = SafetyModel::initialized(8);
  InfractionFeatures k;
  k << 2, 1, 0, 0, 1;
  const double a = score_safety(m, k);
  CHECK(a == score_safety(m, k));
  CHECK(a <= 1.0);
  CHECK(score_safety_batch(m, k)(0) == doctest::Approx(a).epsilon(1e-12));
  CHECK(score_safety(SafetyModel{}, k) == 1.0);
}

TEST_CASE("task reward") {
  const auto sc = sim::reference_scenario();
  const Vec3 goal = sc.world.goal;
  CHECK(task_reward(goal, goal, 10.2) == 1.0);
  CHECK(task_reward(goal + Vec3(0, 5.1, 0), goal, 10.2) == doctest::Approx(0.5));
  CHECK(task_reward(goal + Vec3(10.2, 0, 0), goal, 10.2) == doctest::Approx(0.0));
  // The published start and goal are 9.963 m apart rather than 10.2 m.
  const double measured = (sc.world.start_bucket - goal).norm();
  CHECK(measured == doctest::Approx(9.963).epsilon(1e-3));
  CHECK(task_reward(sc.world.start_bucket, goal, 10.2) == doctest::Approx(1.0 - measured / 10.2));
  CHECK(task_reward(sc.world.start_bucket, goal, measured) == doctest::Approx(0.0));
  expect_code([&] { task_reward(goal, goal, 0.0); }, ErrorCode::InvalidArgument);
}

TEST_CASE("assemble_reward and masks") {
  CHECK(assemble_reward(1.0, 0.3, 0.2, RewardMask::all()).total == doctest::Approx(1.5));
  CHECK(assemble_reward(1.0, 0.3, 0.2, RewardMask{}).total == 1.0);
  const auto td = assemble_reward(0.4, 0.1, 99.0, RewardMask::parse("task,dynamic"));
  CHECK(td.total == doctest::Approx(0.5));
  CHECK(td.r_s == 0.0);
  expect_code([] { assemble_reward(1, 1, 1, RewardMask{false, false, false}); }, ErrorCode::EmptyMask);
  expect_code([] { RewardMask::parse("task,bogus"); }, ErrorCode::InvalidArgument);
  expect_code([] { RewardMask::parse(""); }, ErrorCode::EmptyMask);
  CHECK(RewardMask::parse("safety,task").to_string() == "task,safety");
}

TEST_CASE("StepScorer pads with the first row until 32 rows exist") {
  const Vec3 goal(0, 0, 0);
  const auto dyn = zero_dynamic_model();
  StepScorer scorer(&dyn, nullptr, goal, 2.0);
  auto r = scorer.score(Vec3(1, 2, 3), InfractionCounts::Zero(), Vec3(1, 0, 0));
  CHECK(r.padded);
  CHECK(r.raw.r_g == doctest::Approx(0.5));
  CHECK(r.raw.r_d == 1.0);
  CHECK(r.raw.r_s == 0.0);
  CHECK(scorer.current_window() == Vec3(1, 2, 3).transpose().replicate<kWindowLength, 1>());
  scorer.score(Vec3(4, 5, 6), InfractionCounts::Zero(), Vec3::Zero());
  const WindowRows w = scorer.current_window();
  CHECK(w.row(kWindowLength - 1) == Vec3(4, 5, 6).transpose());
  CHECK(w.row(kWindowLength - 2) == Vec3(1, 2, 3).transpose());
  CHECK(w.row(0) == Vec3(1, 2, 3).transpose());
  for (int k = 2; k < kWindowLength - 1; ++k) r = scorer.score(Vec3(k, 0, 0), InfractionCounts::Zero(), Vec3::Zero());
  CHECK(r.padded);
  r = scorer.score(Vec3(99, 0, 0), InfractionCounts::Zero(), Vec3::Zero());
  CHECK_FALSE(r.padded);
  CHECK(scorer.current_window()(0, 0) == 1.0);
  scorer.score(Vec3(100, 0, 0), InfractionCounts::Zero(), Vec3::Zero());
  CHECK(scorer.current_window()(0, 0) == 4.0);
  scorer.reset();
  expect_code([&] { scorer.current_window(); }, ErrorCode::InvalidArgument);
}

TEST_CASE("checkpoint round trip is lossless") {
  Rng rng(19);
  auto dyn = DynamicModel::initialized(9);
  dyn.stats = FeatureStats{Vec3(1, 2, 3), Vec3(0.5, 0.25, 4)};
  const auto bytes = encode_checkpoint(to_checkpoint(dyn));
  const auto back = dynamic_model_from(decode_checkpoint(bytes));
  CHECK(back.encoder.weights == dyn.encoder.weights);
  CHECK(back.output_head.bias == dyn.output_head.bias);
  CHECK(back.stats->std == dyn.stats->std);
  const WindowRows w = random_window(rng);
  CHECK(score_dynamic(back, w) == score_dynamic(dyn, w));

  auto saf = SafetyModel::initialized(10);
  saf.scale = InfractionScale{(InfractionFeatures() << 3, 1, 2, 1, 1).finished()};
  const auto saf_back = safety_model_from(decode_checkpoint(encode_checkpoint(to_checkpoint(saf))));
  const InfractionFeatures k = (InfractionFeatures() << 1, 0, 2, 0, 1).finished();
  CHECK(score_safety(saf_back, k) == score_safety(saf, k));

  expect_code([&] { safety_model_from(decode_checkpoint(bytes)); }, ErrorCode::CheckpointLoadError);
}

TEST_CASE("checkpoint corruption and version checks") {
  const auto bytes = encode_checkpoint(to_checkpoint(DynamicModel::initialized(11)));
  expect_code([&] { decode_checkpoint(std::string_view(bytes).substr(0, bytes.size() - 9)); },
              ErrorCode::CorruptCheckpoint);
  std::string flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x10;
  expect_code([&] { decode_checkpoint(flipped); }, ErrorCode::CorruptCheckpoint);
  expect_code([&] { decode_checkpoint("NOTACKPTxxxxxxxxxxxxxxxx"); }, ErrorCode::CorruptCheckpoint);

  // Hand-built file with a valid checksum but a future schema version.
  const std::string header = R"({"schema_version":2,"kind":"dynamic","blocks":[],"meta":{}})";
  std::string future = "OPSCKPT1";
  put_u32(future, static_cast<std::uint32_t>(header.size()));
  future += header;
  future.append(8, '\0');
  put_u32(future, crc32_of(future));
  expect_code([&] { decode_checkpoint(future); }, ErrorCode::VersionMismatch);

  expect_code([] { load_checkpoint_file("/nonexistent/model.ckpt"); }, ErrorCode::CheckpointLoadError);
}
