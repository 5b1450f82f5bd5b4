#pragma once

#include "ame/core.hpp"

#include <vector>

namespace ame {

/// s_ij = Theta(g(i), g(j)) for 0-based block memberships g.
Matrix blockmodel_matrix(const std::vector<int>& memberships, const Matrix& Theta);

struct Eigenmodel {
  Matrix U;       // n x r orthonormal columns
  Vector lambda;  // may contain negative entries
  double reconstruction_error = 0.0;  // || S - U diag(lambda) U^T ||_F

  Matrix reconstruct() const;
};

/// Best rank-r symmetric approximation, keeping the r eigenvalues largest in
/// absolute value. Rejects inputs that are not symmetric to 1e-10.
Eigenmodel eigenmodel_embed(const Matrix& S, int r);

}  // namespace ame
