#pragma once

#include "opscore/common/types.hpp"

namespace opscore::reward {

// Diagonal Gaussian posterior parameterised by mean and log-variance.
struct DiagGaussian {
  VecX mu;
  VecX logvar;
};

// KL(N(mu, diag(exp(logvar))) || N(0, I)) = 1/2 sum(exp(logvar) + mu^2 - 1 - logvar).
// NonFiniteInput on non-finite entries, ShapeMismatch on unequal lengths.
double kl_diag_gaussian_vs_standard(const DiagGaussian& q);

// Column-wise KL for batched posteriors (latent x batch).
VecX kl_columns(const MatX& mu, const MatX& logvar);

}  // namespace opscore::reward
