#pragma once

#include "ame/core.hpp"
#include "ame/random.hpp"

namespace ame {

/// Symmetric square root through an eigendecomposition. Eigenvalues in
/// (-1e-12 * max|lambda|, 0] are clipped to zero; anything more negative
/// raises NumericalError naming `what` and the offending eigenvalue.
Matrix sym_sqrt(const Matrix& m, const char* what = "matrix");
Matrix sym_inv_sqrt(const Matrix& m, const char* what = "matrix");

/// Inverse of a symmetric positive definite matrix via Cholesky.
Matrix spd_inverse(const Matrix& m, const char* what = "matrix");

/// Draw from Wishart(scale, df) (mean df * scale) by the Bartlett decomposition.
Matrix sample_wishart(const Matrix& scale, double df, Random& rng);

/// Draw from N(mean, cov).
Vector sample_mvn(const Vector& mean, const Matrix& cov, Random& rng);

/// Draw from N(P^{-1} b, P^{-1}) given the precision P and linear term b.
Vector sample_mvn_canonical(const Matrix& precision, const Vector& linear, Random& rng,
                            const char* what = "precision");

}  // namespace ame
