#include "ame/latent_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ame {

Matrix blockmodel_matrix(const std::vector<int>& memberships, const Matrix& Theta) {
  if (Theta.rows() != Theta.cols()) throw DataError("Theta must be square");
  if ((Theta - Theta.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw DataError("Theta must be symmetric");
  const auto n = static_cast<Eigen::Index>(memberships.size());
  for (int g : memberships)
    if (g < 0 || g >= Theta.rows()) throw DataError("block membership out of range");
  Matrix S(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) S(i, j) = Theta(memberships[i], memberships[j]);
  return S;
}

Matrix Eigenmodel::reconstruct() const {
  return U * lambda.asDiagonal() * U.transpose();
}

Eigenmodel eigenmodel_embed(const Matrix& S, int r) {
  if (S.rows() != S.cols()) throw DataError("eigenmodel needs a square matrix");
  const Eigen::Index n = S.rows();
  if (r < 0 || r > n) throw DataError("eigenmodel rank must lie in [0, n]");
  if (n > 0 && (S - S.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw DataError("eigenmodel needs a symmetric matrix");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (S + S.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return std::abs(eig.eigenvalues()(x)) > std::abs(eig.eigenvalues()(y));
  });

  Eigenmodel out;
  out.U.resize(n, r);
  out.lambda.resize(r);
  for (int k = 0; k < r; ++k) {
    out.U.col(k) = eig.eigenvectors().col(order[k]);
    out.lambda(k) = eig.eigenvalues()(order[k]);
  }
  out.reconstruction_error = (S - out.reconstruct()).norm();
  return out;
}

}  // namespace ame
