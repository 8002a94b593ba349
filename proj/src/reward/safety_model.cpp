#include "opscore/reward/safety_model.hpp"

#include "opscore/common/error.hpp"
#include "opscore/common/rng.hpp"
#include "opscore/nn/gaussian.hpp"

namespace opscore::reward {
namespace {

void check_counts(const MatX& raw) {
  require(raw.rows() == kNumInfractionTypes, ErrorCode::ShapeMismatch, "infraction input must have 5 rows");
  require(raw.allFinite(), ErrorCode::NonFiniteInput, "infraction counts must be finite");
  require((raw.array() >= 0).all(), ErrorCode::NegativeInfraction, "infraction counts must be non-negative");
}

MatX normalized_input(const SafetyModel& model, const MatX& raw) {
  check_counts(raw);
  return model.scale ? model.scale->normalize(raw) : raw;
}

}  // namespace

InfractionScale InfractionScale::from_counts(const MatX& counts) {
  InfractionScale s;
  if (counts.cols() > 0) s.max = counts.rowwise().maxCoeff().cwiseMax(1.0);
  return s;
}

MatX InfractionScale::normalize(const MatX& counts) const {
  return counts.array().colwise() / max.array();
}

SafetyModel SafetyModel::initialized(std::uint64_t seed) {
  Rng rng(seed);
  SafetyModel m;
  m.hidden1.initialize(rng);
  m.hidden2.initialize(rng);
  m.mu_head.initialize(rng);
  m.logvar_head.initialize(rng);
  m.sum_head.initialize(rng);
  return m;
}

nn::ParamBlocks<double> SafetyModel::parameter_blocks() {
  nn::ParamBlocks<double> out;
  for (auto* part : {&hidden1, &hidden2, &mu_head, &logvar_head, &sum_head})
    for (auto b : part->parameter_blocks()) out.push_back(b);
  return out;
}

SafetyPosterior encode_infractions(const SafetyModel& model, const MatX& raw_counts) {
  const MatX h = nn::forward(model.hidden2, nn::forward(model.hidden1, normalized_input(model, raw_counts)));
  return {nn::forward(model.mu_head, h), nn::forward(model.logvar_head, h)};
}

double safety_loss(const SafetyModel& model, const MatX& raw_counts, const MatX& noise, SafetyModel* grad) {
  const MatX x = normalized_input(model, raw_counts);
  const Eigen::Index B = x.cols();
  require(B > 0, ErrorCode::ShapeMismatch, "safety_loss: empty batch");
  require(noise.rows() == kSafetyLatent && noise.cols() == B, ErrorCode::ShapeMismatch,
          "safety_loss: noise must be latent x batch");

  nn::DenseCache<double> c1, c2, cmu, clv, csum;
  const MatX& h1 = nn::forward(model.hidden1, x, c1);
  const MatX& h2 = nn::forward(model.hidden2, h1, c2);
  const MatX mu = nn::forward(model.mu_head, h2, cmu);
  const MatX logvar = nn::forward(model.logvar_head, h2, clv);
  const MatX z = nn::reparam_sample<double>(mu, logvar, noise);
  const MatX& predicted = nn::forward(model.sum_head, z, csum);

  const Eigen::RowVectorXd totals = raw_counts.colwise().sum();
  const Eigen::RowVectorXd residual = predicted.row(0) - totals;
  const double loss = (residual.squaredNorm() + kl_columns(mu, logvar).sum()) / static_cast<double>(B);
  if (!grad) return loss;

  const double scale = 1.0 / static_cast<double>(B);
  const MatX d_pred = (2.0 * scale) * residual;
  const MatX dz = nn::backward(model.sum_head, csum, d_pred, grad->sum_head);
  auto rp = nn::reparam_backward<double>(logvar, noise, dz);
  rp.d_mu += scale * mu;
  rp.d_logvar.array() += scale * 0.5 * (logvar.array().exp() - 1.0);
  MatX dh2 = nn::backward(model.mu_head, cmu, rp.d_mu, grad->mu_head);
  dh2 += nn::backward(model.logvar_head, clv, rp.d_logvar, grad->logvar_head);
  const MatX dh1 = nn::backward(model.hidden2, c2, dh2, grad->hidden2);
  (void)nn::backward(model.hidden1, c1, dh1, grad->hidden1);
  return loss;
}

double safety_loss(const SafetyModel& model, const InfractionFeatures& counts, const VecX& noise, SafetyModel* grad) {
  return safety_loss(model, MatX(counts), MatX(noise), grad);
}

VecX safety_kl(const SafetyModel& model, const MatX& raw_counts) {
  const SafetyPosterior p = encode_infractions(model, raw_counts);
  return kl_columns(p.mu, p.logvar);
}

VecX score_safety_batch(const SafetyModel& model, const MatX& raw_counts) {
  return (1.0 - safety_kl(model, raw_counts).array()).matrix();
}

double score_safety(const SafetyModel& model, const InfractionFeatures& counts) {
  return score_safety_batch(model, MatX(counts))(0);
}

}  // namespace opscore::reward
