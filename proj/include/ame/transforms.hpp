#pragma once

#include "ame/core.hpp"
#include "ame/random.hpp"

namespace ame {

/// Per-cell open interval (lo, hi) that the latent Y must occupy.
/// Unobserved cells are (-inf, +inf).
struct CellBounds {
  Matrix lo;
  Matrix hi;
};

struct TransformOptions {
  /// Compare ordinal levels within rows only instead of across the whole matrix.
  bool ordinal_within_row = false;
};

CellBounds binary_bounds(const Sociomatrix& S);
CellBounds ordinal_bounds(const Sociomatrix& S, const Matrix& Y, bool within_row = false);
CellBounds frn_bounds(const Sociomatrix& S, const Matrix& Y);
/// Dispatches on the data kind; continuous data give unbounded cells.
CellBounds constraint_bounds(const Sociomatrix& S, const Matrix& Y,
                             const TransformOptions& options = {});

/// Number of observed cells with Y outside its constraint interval.
int count_constraint_violations(const Sociomatrix& S, const Matrix& Y,
                                const TransformOptions& options = {});

/// A latent matrix inside C(S) used to start a chain.
Matrix initial_latent(const Sociomatrix& S);

/// Gibbs sweep of the latent Y given the cell means `mu`, the dyadic
/// correlation rho and sigma2 (1 for every transformation family).
///
/// Diagonal cells are drawn from N(mu_ii, sigma2 (1 + rho)). Off-diagonal
/// cells are drawn from N(mu_ij + rho (y_ji - mu_ji), sigma2 (1 - rho^2))
/// truncated to their bounds, one level of S at a time: bounds for a level
/// depend only on cells of other levels, so within a level the below- and
/// above-diagonal halves are each conditionally independent blocks.
void constrained_latent_update(Matrix& Y, const Matrix& mu, double sigma2, double rho,
                               const Sociomatrix& S, Random& rng,
                               const TransformOptions& options = {});
void constrained_latent_update(ChainState& state, const Matrix& mu, const Sociomatrix& S,
                               Random& rng, const TransformOptions& options = {});

}  // namespace ame
