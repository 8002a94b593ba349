#include "opscore/reward/dynamic_model.hpp"

#include <array>

#include "opscore/common/error.hpp"
#include "opscore/common/rng.hpp"
#include "opscore/nn/gaussian.hpp"

namespace opscore::reward {
namespace {

// Gathers row k of every window as one (features x batch) column block.
template <typename Get>
MatX gather_row(std::size_t batch, int k, Get&& rows_of) {
  MatX x(kNumDynamicFeatures, static_cast<Eigen::Index>(batch));
  for (std::size_t b = 0; b < batch; ++b) x.col(static_cast<Eigen::Index>(b)) = rows_of(b).row(k).transpose();
  return x;
}

}  // namespace

WindowRows FeatureStats::normalize(const WindowRows& raw) const {
  WindowRows out = raw;
  out.rowwise() -= mean.transpose();
  out.array().rowwise() /= std.transpose().array();
  return out;
}

FeatureStats FeatureStats::from_rows(const MatX& rows) {
  require(rows.rows() > 0 && rows.cols() == kNumDynamicFeatures, ErrorCode::ShapeMismatch,
          "telemetry rows must be n x 3 with n > 0");
  FeatureStats s;
  s.mean = rows.colwise().mean().transpose();
  const MatX centered = rows.rowwise() - s.mean.transpose();
  s.std = (centered.array().square().colwise().sum() / static_cast<double>(rows.rows())).sqrt().transpose();
  s.std = s.std.cwiseMax(1e-6);
  return s;
}

DynamicModel DynamicModel::initialized(std::uint64_t seed) {
  Rng rng(seed);
  DynamicModel m;
  m.encoder.initialize(rng);
  m.mu_head.initialize(rng);
  m.logvar_head.initialize(rng);
  m.decoder.initialize(rng);
  m.output_head.initialize(rng);
  return m;
}

nn::ParamBlocks<double> DynamicModel::parameter_blocks() {
  nn::ParamBlocks<double> out;
  for (auto* part : {&encoder, &decoder})
    for (auto b : part->parameter_blocks()) out.push_back(b);
  for (auto* part : {&mu_head, &logvar_head, &output_head})
    for (auto b : part->parameter_blocks()) out.push_back(b);
  return out;
}

PosteriorBatch encode_windows(const DynamicModel& model, std::span<const WindowRows> normalized) {
  const std::size_t B = normalized.size();
  auto state = nn::LstmState<double>::zeros(kDynamicLatent, static_cast<Eigen::Index>(B));
  for (int k = 0; k < kWindowLength; ++k)
    state = nn::lstm_step(model.encoder, gather_row(B, k, [&](std::size_t b) -> const WindowRows& { return normalized[b]; }),
                          state);
  return {nn::forward(model.mu_head, state.h), nn::forward(model.logvar_head, state.h)};
}

DiagGaussian encode_window(const DynamicModel& model, const WindowRows& normalized) {
  const PosteriorBatch p = encode_windows(model, std::span(&normalized, 1));
  return {p.mu.col(0), p.logvar.col(0)};
}

double dynamic_loss(const DynamicModel& model, std::span<const WindowPair> batch, const MatX& noise,
                    DynamicModel* grad) {
  const std::size_t B = batch.size();
  require(B > 0, ErrorCode::ShapeMismatch, "dynamic_loss: empty batch");
  require(noise.rows() == kDynamicLatent && noise.cols() == static_cast<Eigen::Index>(B), ErrorCode::ShapeMismatch,
          "dynamic_loss: noise must be latent x batch");
  const Eigen::Index Bi = static_cast<Eigen::Index>(B);
  auto input_of = [&](std::size_t b) -> const WindowRows& { return batch[b].input; };
  auto target_of = [&](std::size_t b) -> const WindowRows& { return batch[b].target; };

  // Encoder.
  std::array<nn::LstmCache<double>, kWindowLength> enc_cache;
  auto state = nn::LstmState<double>::zeros(kDynamicLatent, Bi);
  for (int k = 0; k < kWindowLength; ++k)
    state = nn::lstm_step(model.encoder, gather_row(B, k, input_of), state, grad ? &enc_cache[k] : nullptr);

  nn::DenseCache<double> mu_cache, lv_cache;
  const MatX mu = nn::forward(model.mu_head, state.h, mu_cache);
  const MatX logvar = nn::forward(model.logvar_head, state.h, lv_cache);
  const MatX z = nn::reparam_sample<double>(mu, logvar, noise);

  // Teacher-forced decoder: step k sees true row t+k and predicts row t+k+1.
  std::array<nn::LstmCache<double>, kWindowLength> dec_cache;
  std::array<nn::DenseCache<double>, kWindowLength> out_cache;
  std::array<MatX, kWindowLength> residual;
  nn::LstmState<double> dec{z, z};
  double sse = 0.0;
  for (int k = 0; k < kWindowLength; ++k) {
    dec = nn::lstm_step(model.decoder, gather_row(B, k, input_of), dec, grad ? &dec_cache[k] : nullptr);
    const MatX& pred = nn::forward(model.output_head, dec.h, out_cache[k]);
    residual[k] = pred - gather_row(B, k, target_of);
    sse += residual[k].squaredNorm();
  }
  const double kl = kl_columns(mu, logvar).sum();
  const double loss = (sse + kl) / static_cast<double>(B);
  if (!grad) return loss;

  const double scale = 1.0 / static_cast<double>(B);
  MatX dh = MatX::Zero(kDynamicLatent, Bi);
  MatX dc = MatX::Zero(kDynamicLatent, Bi);
  for (int k = kWindowLength - 1; k >= 0; --k) {
    dh += nn::backward(model.output_head, out_cache[k], (2.0 * scale) * residual[k], grad->output_head);
    const auto g = nn::lstm_step_backward(model.decoder, dec_cache[k], dh, dc, grad->decoder);
    dh = g.dh_prev;
    dc = g.dc_prev;
  }
  const MatX dz = dh + dc;
  auto rp = nn::reparam_backward<double>(logvar, noise, dz);
  rp.d_mu += scale * mu;
  rp.d_logvar.array() += scale * 0.5 * (logvar.array().exp() - 1.0);

  MatX d_enc_h = nn::backward(model.mu_head, mu_cache, rp.d_mu, grad->mu_head);
  d_enc_h += nn::backward(model.logvar_head, lv_cache, rp.d_logvar, grad->logvar_head);

  dh = d_enc_h;
  dc = MatX::Zero(kDynamicLatent, Bi);
  for (int k = kWindowLength - 1; k >= 0; --k) {
    const auto g = nn::lstm_step_backward(model.encoder, enc_cache[k], dh, dc, grad->encoder);
    dh = g.dh_prev;
    dc = g.dc_prev;
  }
  return loss;
}

double dynamic_loss(const DynamicModel& model, const WindowRows& input, const WindowRows& target,
                    const VecX& noise, DynamicModel* grad) {
  const WindowPair pair{input, target};
  return dynamic_loss(model, std::span(&pair, 1), MatX(noise), grad);
}

VecX score_dynamic_batch(const DynamicModel& model, std::span<const WindowRows> raw_windows) {
  if (!model.stats) fail(ErrorCode::UnnormalizedInput, "dynamic model has no normalization statistics");
  std::vector<WindowRows> normalized;
  normalized.reserve(raw_windows.size());
  for (const auto& w : raw_windows) normalized.push_back(model.stats->normalize(w));
  const PosteriorBatch p = encode_windows(model, normalized);
  return (1.0 - kl_columns(p.mu, p.logvar).array()).matrix();
}

double score_dynamic(const DynamicModel& model, const WindowRows& raw_window) {
  return score_dynamic_batch(model, std::span(&raw_window, 1))(0);
}

}  // namespace opscore::reward
