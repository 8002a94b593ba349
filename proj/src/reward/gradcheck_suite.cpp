#include "opscore/reward/gradcheck_suite.hpp"

#include "opscore/common/rng.hpp"
#include "opscore/nn/dense.hpp"
#include "opscore/nn/gaussian.hpp"
#include "opscore/nn/gradcheck.hpp"
#include "opscore/nn/lstm.hpp"
#include "opscore/reward/dynamic_model.hpp"
#include "opscore/reward/safety_model.hpp"

namespace opscore::reward {
namespace {

using nn::ParamBlocks;

MatX random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  MatX m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -1.0, 1.0);
  return m;
}

struct DenseStack {
  nn::Dense<double> first{3, 6, nn::Activation::elu};
  nn::Dense<double> second{6, 2, nn::Activation::tanh};
  ParamBlocks<double> parameter_blocks() {
    auto a = first.parameter_blocks();
    for (auto b : second.parameter_blocks()) a.push_back(b);
    return a;
  }
};

struct LstmStack {
  nn::LstmCell<double> cell{3, 5};
  ParamBlocks<double> parameter_blocks() { return cell.parameter_blocks(); }
};

// Posterior heads on a fixed encoding, one reparameterized sample, squared
// error to a target plus the KL to N(0, I).
struct VaeHead {
  nn::Dense<double> mu{4, 3, nn::Activation::identity};
  nn::Dense<double> logvar{4, 3, nn::Activation::identity};
  ParamBlocks<double> parameter_blocks() {
    auto a = mu.parameter_blocks();
    for (auto b : logvar.parameter_blocks()) a.push_back(b);
    return a;
  }
};

template <typename Model>
void corrupt_gradient(Model* grad) {
  if (grad) grad->parameter_blocks()[0][0] += 0.1;
}

template <typename Model, typename LossFn>
GradCheckRow check(const std::string& name, Model& model, LossFn loss, bool corrupt) {
  auto wrapped = [&](const Model& m, Model* grad) {
    const double l = loss(m, grad);
    if (corrupt) corrupt_gradient(grad);
    return l;
  };
  const auto r = nn::grad_check(model, wrapped, 1e-5);
  return {name, r.parameters_checked, r.max_relative_error};
}

}  // namespace

std::vector<GradCheckRow> run_gradcheck_suite(std::uint64_t seed, bool corrupt) {
  std::vector<GradCheckRow> rows;

  {
    Rng rng(derive_seed(seed, 1));
    DenseStack m;
    m.first.initialize(rng);
    m.second.initialize(rng);
    const MatX x = random_matrix(rng, 3, 5);
    const MatX y = random_matrix(rng, 2, 5);
    rows.push_back(check("dense", m, [&](const DenseStack& model, DenseStack* grad) {
      nn::DenseCache<double> c1, c2;
      const MatX& h = nn::forward(model.first, x, c1);
      const MatX& out = nn::forward(model.second, h, c2);
      const MatX diff = out - y;
      if (grad) {
        const MatX dh = nn::backward(model.second, c2, 2.0 * diff, grad->second);
        (void)nn::backward(model.first, c1, dh, grad->first);
      }
      return diff.squaredNorm();
    }, corrupt));
  }

  {
    Rng rng(derive_seed(seed, 2));
    LstmStack m;
    m.cell.initialize(rng);
    std::vector<MatX> xs;
    for (int k = 0; k < 8; ++k) xs.push_back(random_matrix(rng, 3, 2));
    rows.push_back(check("lstm", m, [&](const LstmStack& model, LstmStack* grad) {
      std::vector<nn::LstmCache<double>> caches(xs.size());
      auto state = nn::LstmState<double>::zeros(5, 2);
      for (std::size_t k = 0; k < xs.size(); ++k) state = nn::lstm_step(model.cell, xs[k], state, &caches[k]);
      const double loss = state.h.squaredNorm() + 0.5 * state.c.array().sum();
      if (grad) {
        MatX dh = 2.0 * state.h;
        MatX dc = MatX::Constant(state.c.rows(), state.c.cols(), 0.5);
        for (std::size_t k = xs.size(); k-- > 0;) {
          auto g = nn::lstm_step_backward(model.cell, caches[k], dh, dc, grad->cell);
          dh = g.dh_prev;
          dc = g.dc_prev;
        }
      }
      return loss;
    }, corrupt));
  }

  {
    Rng rng(derive_seed(seed, 3));
    VaeHead m;
    m.mu.initialize(rng);
    m.logvar.initialize(rng);
    const MatX enc = random_matrix(rng, 4, 3);
    const MatX target = random_matrix(rng, 3, 3);
    const MatX noise = standard_normal(rng, 3, 3);
    rows.push_back(check("vae_head", m, [&](const VaeHead& model, VaeHead* grad) {
      nn::DenseCache<double> cm, cl;
      const MatX mu = nn::forward(model.mu, enc, cm);
      const MatX lv = nn::forward(model.logvar, enc, cl);
      const MatX z = nn::reparam_sample<double>(mu, lv, noise);
      const MatX diff = z - target;
      const double kl = 0.5 * (lv.array().exp() + mu.array().square() - 1.0 - lv.array()).sum();
      if (grad) {
        auto g = nn::reparam_backward<double>(lv, noise, 2.0 * diff);
        const MatX d_mu = g.d_mu + mu;
        const MatX d_lv = g.d_logvar + (0.5 * (lv.array().exp() - 1.0)).matrix();
        (void)nn::backward(model.mu, cm, d_mu, grad->mu);
        (void)nn::backward(model.logvar, cl, d_lv, grad->logvar);
      }
      return diff.squaredNorm() + kl;
    }, corrupt));
  }

  {
    Rng rng(derive_seed(seed, 4));
    auto m = DynamicModel::initialized(derive_seed(seed, 5));
    std::vector<WindowPair> batch;
    for (int b = 0; b < 2; ++b) {
      WindowPair p;
      p.input = random_matrix(rng, kWindowLength, kNumDynamicFeatures);
      p.target = random_matrix(rng, kWindowLength, kNumDynamicFeatures);
      batch.push_back(p);
    }
    const MatX noise = standard_normal(rng, kDynamicLatent, 2);
    rows.push_back(check("dynamic_elbo", m, [&](const DynamicModel& model, DynamicModel* grad) {
      return dynamic_loss(model, batch, noise, grad);
    }, corrupt));
  }

  {
    Rng rng(derive_seed(seed, 6));
    auto m = SafetyModel::initialized(derive_seed(seed, 7));
    MatX counts(kNumInfractionTypes, 3);
    counts << 0, 1, 3, 0, 0, 1, 0, 0, 0, 2, 1, 0, 0, 0, 1;
    const MatX noise = standard_normal(rng, kSafetyLatent, 3);
    rows.push_back(check("safety_elbo", m, [&](const SafetyModel& model, SafetyModel* grad) {
      return safety_loss(model, counts, noise, grad);
    }, corrupt));
  }
  return rows;
}

}  // namespace opscore::reward
