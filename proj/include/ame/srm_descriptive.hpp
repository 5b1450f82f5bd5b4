#pragma once

#include "ame/core.hpp"

#include <utility>
#include <vector>

namespace ame {

/// Plug-in ANOVA-style summaries of a sociomatrix.
///
/// These are empirical-covariance estimators: consistent, but not the
/// unbiased moment estimators of the classical SRM literature.
struct SrmMoments {
  double mu_hat = 0.0;
  Vector a_hat;
  Vector b_hat;
  double sigma_a2 = 0.0;
  double sigma_b2 = 0.0;
  double sigma_ab = 0.0;
  double sigma2_hat = 0.0;
  double rho_hat = 0.0;
  Matrix resid;  // NaN on unobserved cells
  Mask mask;
};

/// Row/column effects from observed-cell means, residuals and variance
/// components. Throws DataError naming the first row or column without any
/// observed entry.
SrmMoments row_col_effects(const Sociomatrix& Y);
SrmMoments row_col_effects(const Matrix& values, const Mask& mask);

struct DyadicScatter {
  /// (resid_ij, resid_ji) for every unordered dyad i < j with both observed.
  std::vector<std::pair<double, double>> dyads;
  /// (a_i, b_i) per node.
  std::vector<std::pair<double, double>> nodes;
};

DyadicScatter dyadic_scatter_data(const SrmMoments& moments);

/// Least-squares fit of beta^T x_ij + a_i + b_j to the observed cells.
struct AdditiveFit {
  Vector beta;
  Vector a;
  Vector b;
  Matrix resid;  // zero on unobserved cells and the diagonal
  int sweeps = 0;
};

/// Backfitting (block Gauss-Seidel) over beta, row and column effects until
/// the largest change falls below `tol`. Collinear columns are handled by a
/// minimum-norm solve; the residual is unique regardless.
AdditiveFit additive_least_squares(const Matrix& values, const Mask& mask, const DyadicDesign& X,
                                   double tol = 1e-11, int max_sweeps = 5000);

}  // namespace ame
