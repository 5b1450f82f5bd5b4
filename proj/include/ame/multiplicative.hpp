#pragma once

#include "ame/core.hpp"
#include "ame/random.hpp"
#include "ame/srrm.hpp"

#include <vector>

namespace ame {

/// Psi^{-1} ~ Wishart((kappa0 Psi0 + [U V]^T [U V])^{-1}, kappa0 + n); returns Psi.
Matrix psi_wishart_update(const Matrix& U, const Matrix& V, const Matrix& Psi0, double kappa0,
                          Random& rng);

/// Prior of one factor column given the remaining latent coordinates:
/// independent across nodes with per-node mean and a shared variance.
struct FactorPrior {
  Vector mean;
  double var = 1.0;
};

/// Gaussian conditioning of coordinate `coord` of (u_i, v_i) (coordinates
/// 0..r-1 are u, r..2r-1 are v) on all other coordinates, under N(0, Psi).
FactorPrior factor_prior_conditional(const Matrix& Psi, const Matrix& U, const Matrix& V,
                                     int coord);

/// Full conditional of one column of U given the matching column v of V.
///
/// With W = c_t (v (x) I) + d_t (I (x) v):
///   W^T W   = ww_scale I + ww_rank_one v v^T
///   W^T r~  = (c_t R~ + d_t R~^T) v
/// The posterior precision is I/prior.var + W^T W, always a scaled identity
/// plus a rank-one term, so moments and square roots are closed form.
struct FactorColumnConditional {
  Vector v;
  double ww_scale = 0.0;
  double ww_rank_one = 0.0;
  Vector wtr;
  FactorPrior prior;
  Vector mean;

  Matrix precision() const;
  Matrix covariance() const;
  Vector sample(Random& rng) const;
};

FactorColumnConditional factor_conditional_moments(const Matrix& Rt, const Vector& v,
                                                   const DecorrelationConstants& k,
                                                   const FactorPrior& prior);

struct FactorUpdateOptions {
  /// Column visiting order; empty means 0..r-1.
  std::vector<int> order;
  /// Update v before u within each column.
  bool v_first = false;
};

/// Column-wise Gibbs update of U and V given everything else.
void update_factor_columns(ChainState& state, const DyadicDesign& X, Random& rng,
                           const FactorUpdateOptions& options = {});

}  // namespace ame
