#include "opscore/reward/gaussian.hpp"

#include "opscore/common/error.hpp"

namespace opscore::reward {

double kl_diag_gaussian_vs_standard(const DiagGaussian& q) {
  require(q.mu.size() == q.logvar.size(), ErrorCode::ShapeMismatch, "mu and logvar lengths differ");
  require(q.mu.allFinite() && q.logvar.allFinite(), ErrorCode::NonFiniteInput, "posterior has non-finite entries");
  return 0.5 * (q.logvar.array().exp() + q.mu.array().square() - 1.0 - q.logvar.array()).sum();
}

VecX kl_columns(const MatX& mu, const MatX& logvar) {
  require(mu.rows() == logvar.rows() && mu.cols() == logvar.cols(), ErrorCode::ShapeMismatch,
          "mu and logvar shapes differ");
  require(mu.allFinite() && logvar.allFinite(), ErrorCode::NonFiniteInput, "posterior has non-finite entries");
  return 0.5 * (logvar.array().exp() + mu.array().square() - 1.0 - logvar.array()).colwise().sum().transpose();
}

}  // namespace opscore::reward
