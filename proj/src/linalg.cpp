#include "ame/linalg.hpp"

#include <cmath>
#include <sstream>

namespace ame {

namespace {

Matrix sym_power(const Matrix& m, bool inverse, const char* what) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw NumericalError(std::string("eigendecomposition failed for ") + what);
  }
  Vector lambda = es.eigenvalues();
  const double scale = lambda.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda(k) < 0.0) {
      if (lambda(k) < -1e-12 * scale) {
        std::ostringstream msg;
        msg << "square root of " << what << " failed: eigenvalue " << lambda(k);
        throw NumericalError(msg.str());
      }
      lambda(k) = 0.0;
    }
    if (inverse) {
      if (lambda(k) <= 0.0) {
        throw NumericalError(std::string("inverse square root of singular ") + what);
      }
      lambda(k) = 1.0 / std::sqrt(lambda(k));
    } else {
      lambda(k) = std::sqrt(lambda(k));
    }
  }
  return es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Matrix sym_sqrt(const Matrix& m, const char* what) { return sym_power(m, false, what); }
Matrix sym_inv_sqrt(const Matrix& m, const char* what) { return sym_power(m, true, what); }

Matrix spd_inverse(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + " is not positive definite");
  }
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

Matrix sample_wishart(const Matrix& scale, double df, Random& rng) {
  const Eigen::Index k = scale.rows();
  if (df <= static_cast<double>(k) - 1.0) {
    throw NumericalError("Wishart degrees of freedom too small");
  }
  Eigen::LLT<Matrix> llt(0.5 * (scale + scale.transpose()));
  if (llt.info() != Eigen::Success) throw NumericalError("Wishart scale not positive definite");
  Matrix bartlett = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    bartlett(i, i) = std::sqrt(rng.chi_square(df - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
  }
  const Matrix la = llt.matrixL() * bartlett;
  return la * la.transpose();
}

Vector sample_mvn(const Vector& mean, const Matrix& cov, Random& rng) {
  Eigen::LLT<Matrix> llt(0.5 * (cov + cov.transpose()));
  if (llt.info() != Eigen::Success) throw NumericalError("covariance not positive definite");
  return mean + llt.matrixL() * rng.normal_vector(mean.size());
}

Vector sample_mvn_canonical(const Matrix& precision, const Vector& linear, Random& rng,
                            const char* what) {
  Eigen::LLT<Matrix> llt(0.5 * (precision + precision.transpose()));
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + " is not positive definite");
  }
  const Vector mean = llt.solve(linear);
  // L L^T = P, so L^{-T} z has covariance P^{-1}
  const Vector z = rng.normal_vector(linear.size());
  return mean + llt.matrixU().solve(z);
}

}  // namespace ame
