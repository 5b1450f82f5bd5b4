#pragma once

#include "ame/core.hpp"
#include "ame/random.hpp"

#include <vector>

namespace ame {

/// Constants of the dyadic (de)correlating maps E = cZ + dZ^T and
/// Z = c_t E + d_t E^T.
struct DecorrelationConstants {
  double c = 1.0;
  double d = 0.0;
  double c_t = 1.0;
  double d_t = 0.0;

  /// Sigma_e^{1/2} = [[c, d], [d, c]].
  Matrix2 sqrt_cov() const;
  /// Sigma_e^{-1/2} = [[c_t, d_t], [d_t, c_t]].
  Matrix2 inv_sqrt_cov() const;
};

DecorrelationConstants decorrelation_constants(double sigma2, double rho);

/// c_t Y + d_t Y^T. Y must be complete.
Matrix decorrelate(const Matrix& Y, const DecorrelationConstants& k);
/// c Z + d Z^T, the inverse of decorrelate.
Matrix correlate(const Matrix& Z, const DecorrelationConstants& k);
/// x~_{i,j} = c_t x_{i,j} + d_t x_{j,i}.
DyadicDesign transform_design(const DyadicDesign& X, const DecorrelationConstants& k);

/// Residual sums that make SS1 + SS2 a closed-form function of rho.
struct DyadicSums {
  int n = 0;
  double off_sq = 0.0;  // sum_{i<j} e_ij^2 + e_ji^2
  double cross = 0.0;   // sum_{i<j} e_ij e_ji
  double diag_sq = 0.0; // sum_i e_ii^2

  static DyadicSums from(const Matrix& E);
  double ss1(double rho) const;
  double ss2(double rho) const;
};

struct Sigma2Conditional {
  double shape = 0.0;
  double rate = 0.0;
  double ss1 = 0.0;
  double ss2 = 0.0;
};

/// Gamma(shape, rate) full conditional of 1/sigma^2.
Sigma2Conditional sigma2_full_conditional_params(const Matrix& E, double rho, double nu0,
                                                 double sigma02);

/// Log of the unnormalized (sigma2, rho) density of the residual matrix.
double rho_log_density(const DyadicSums& sums, double sigma2, double rho);
/// Cell midpoints of an equal-width grid over (-1, 1).
std::vector<double> rho_grid(int resolution);
/// Uniform-prior log posterior at each grid point.
std::vector<double> rho_grid_log_density(const Matrix& E, double sigma2, int resolution);
/// Grid draw of rho, jittered uniformly within the chosen cell.
double rho_grid_update(const Matrix& E, double sigma2, int resolution, Random& rng);

/// Sigma^{-1} ~ Wishart([eta0 Sigma0 + F^T F]^{-1}, eta0 + n); returns Sigma.
Matrix2 sigma_wishart_update(const Vector& a, const Vector& b, const Matrix2& Sigma0, double eta0,
                             Random& rng);

/// Full conditional of the decorrelated additive effects F = (a, b):
/// mean S G - t 1 1^T H, covariance G (x) I - H (x) 1 1^T.
struct AdditiveFullConditional {
  Matrix2 G;
  Matrix2 H;
  Matrix S;  // n x 2: row sums and column sums of R
  double t = 0.0;

  int n() const { return static_cast<int>(S.rows()); }
  Matrix mean() const;
  /// Dense 2n x 2n covariance of vec(F); for testing and diagnostics.
  Matrix dense_covariance() const;
};

/// G = (Sigma_t^{-1} + nI)^{-1} and H = (Sigma_t^{-1} + n 11^T)^{-1} J G.
void additive_gh(const Matrix2& Sigma_tilde, int n, Matrix2& G, Matrix2& H);
AdditiveFullConditional additive_effects_suffstats(const Matrix& R, const Matrix2& Sigma_tilde);

/// Exact draw of F. The covariance splits over the constant vector and its
/// complement as (G - nH) (x) 11^T/n + G (x) (I - 11^T/n).
Matrix sample_additive_effects(const AdditiveFullConditional& stats, Random& rng);

struct BetaSuffStats {
  Matrix Q1, Q2, Q3;
  Vector l1, l2, l3;
  double h = 0.0;
  Vector xbar;
  Matrix Xr, Xc;  // n x p row / column design means
  Vector yr, yc;

  Matrix Q() const { return Q1 + Q2 + Q3; }
  Vector l() const { return l1 + l2 + l3; }
};

/// Sufficient statistics of the beta likelihood marginalized over the
/// additive effects, on decorrelated data.
BetaSuffStats beta_suffstats(const Matrix& Yt, const DyadicDesign& Xt, const Matrix2& G,
                             const Matrix2& H);
BetaSuffStats beta_suffstats(const Matrix& Yt, const DyadicDesign& Xt,
                             const AdditiveFullConditional& stats);

struct BetaConditional {
  Matrix precision;  // Q0 + Q
  Vector linear;     // Q0 beta0 + l
  Vector mean;
  Matrix cov;

  double log_density(const Vector& beta) const;
};

BetaConditional beta_full_conditional(const BetaSuffStats& stats, const Vector& beta0,
                                      const Matrix& Q0);

/// beta^T x + u_i^T v_j + a_i + b_j for every cell.
Matrix cell_means(const ChainState& state, const DyadicDesign& X);

/// Replaces unobserved cells of state.Y (diagonal included) by draws from
/// their full conditionals; observed cells are untouched.
void impute_missing_Y(ChainState& state, const Mask& observed, const DyadicDesign& X,
                      Random& rng);

struct SrrmStepOptions {
  bool update_sigma2 = true;  // false for transformation families (sigma2 = 1)
  bool impute_missing = true;
};

/// One scan of the SRRM Gibbs sampler on Y - UV^T:
/// (beta, a, b), sigma2, rho, Sigma, then missing Y.
void srrm_gibbs_step(ChainState& state, const Mask& observed, const DyadicDesign& X,
                     const PriorSpec& prior, Random& rng, const SrrmStepOptions& options = {});

}  // namespace ame
