#include "ame/srm_descriptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ame {

SrmMoments row_col_effects(const Sociomatrix& Y) { return row_col_effects(Y.values(), Y.mask()); }

SrmMoments row_col_effects(const Matrix& values, const Mask& mask_in) {
  const Eigen::Index n = values.rows();
  Mask mask = mask_in;
  for (Eigen::Index i = 0; i < n; ++i) mask(i, i) = false;

  Vector row_sum = Vector::Zero(n), col_sum = Vector::Zero(n);
  Vector row_count = Vector::Zero(n), col_count = Vector::Zero(n);
  double total = 0.0;
  double count = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!mask(i, j)) continue;
      const double y = values(i, j);
      row_sum(i) += y;
      col_sum(j) += y;
      row_count(i) += 1.0;
      col_count(j) += 1.0;
      total += y;
      count += 1.0;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (row_count(i) == 0.0) throw DataError("row " + std::to_string(i) + " has no observed entries");
    if (col_count(i) == 0.0) {
      throw DataError("column " + std::to_string(i) + " has no observed entries");
    }
  }

  SrmMoments m;
  m.mask = mask;
  m.mu_hat = total / count;
  m.a_hat = row_sum.cwiseQuotient(row_count).array() - m.mu_hat;
  m.b_hat = col_sum.cwiseQuotient(col_count).array() - m.mu_hat;

  m.resid = Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  double ss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!mask(i, j)) continue;
      const double e = values(i, j) - (m.mu_hat + m.a_hat(i) + m.b_hat(j));
      m.resid(i, j) = e;
      ss += e * e;
    }
  }
  m.sigma2_hat = ss / count;

  const Vector ac = m.a_hat.array() - m.a_hat.mean();
  const Vector bc = m.b_hat.array() - m.b_hat.mean();
  const double dn = static_cast<double>(n);
  m.sigma_a2 = ac.squaredNorm() / (dn - 1.0);
  m.sigma_b2 = bc.squaredNorm() / (dn - 1.0);
  m.sigma_ab = ac.dot(bc) / (dn - 1.0);

  // correlation over dyads observed in both directions, each dyad counted
  // once in each orientation so the two margins share moments
  double sxy = 0.0, sxx = 0.0, sx = 0.0, pairs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!(mask(i, j) && mask(j, i))) continue;
      const double x = m.resid(i, j), y = m.resid(j, i);
      sxy += 2.0 * x * y;
      sxx += x * x + y * y;
      sx += x + y;
      pairs += 2.0;
    }
  }
  if (pairs > 0.0) {
    const double mean = sx / pairs;
    const double var = sxx / pairs - mean * mean;
    const double cov = sxy / pairs - mean * mean;
    m.rho_hat = var > 0.0 ? std::clamp(cov / var, -1.0, 1.0) : 0.0;
  }
  return m;
}

DyadicScatter dyadic_scatter_data(const SrmMoments& moments) {
  DyadicScatter out;
  const Eigen::Index n = moments.resid.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (moments.mask(i, j) && moments.mask(j, i)) {
        out.dyads.emplace_back(moments.resid(i, j), moments.resid(j, i));
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) out.nodes.emplace_back(moments.a_hat(i), moments.b_hat(i));
  return out;
}

}  // namespace ame

namespace ame {

AdditiveFit additive_least_squares(const Matrix& values, const Mask& mask_in, const DyadicDesign& X,
                                   double tol, int max_sweeps) {
  const Eigen::Index n = values.rows();
  const int p = X.p();
  Mask mask = mask_in;
  for (Eigen::Index i = 0; i < n; ++i) mask(i, i) = false;
  Matrix w = mask.cast<double>();
  const Matrix y = w.cwiseProduct(values.unaryExpr([](double v) { return std::isfinite(v) ? v : 0.0; }));

  const Vector row_count = w.rowwise().sum();
  const Vector col_count = w.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (row_count(i) == 0.0) throw DataError("row " + std::to_string(i) + " has no observed entries");
    if (col_count(i) == 0.0) throw DataError("column " + std::to_string(i) + " has no observed entries");
  }

  Matrix gram(p, p);
  for (int k = 0; k < p; ++k)
    for (int l = 0; l <= k; ++l)
      gram(k, l) = gram(l, k) = w.cwiseProduct(X.slice(k)).cwiseProduct(X.slice(l)).sum();
  Eigen::CompleteOrthogonalDecomposition<Matrix> gram_solver;
  if (p > 0) gram_solver.compute(gram);

  AdditiveFit fit;
  fit.beta = Vector::Zero(p);
  fit.a = Vector::Zero(n);
  fit.b = Vector::Zero(n);
  Matrix xb = Matrix::Zero(n, n);
  const double scale = 1.0 + y.cwiseAbs().maxCoeff();

  for (fit.sweeps = 1; fit.sweeps <= max_sweeps; ++fit.sweeps) {
    double change = 0.0;
    if (p > 0) {
      Matrix r = y - xb;
      r.colwise() -= fit.a;
      r.rowwise() -= fit.b.transpose();
      r = r.cwiseProduct(w);
      Vector rhs(p);
      for (int k = 0; k < p; ++k) rhs(k) = r.cwiseProduct(X.slice(k)).sum();
      // solve for the full coefficient, not the increment, to avoid drift
      rhs += gram * fit.beta;
      const Vector beta = gram_solver.solve(rhs);
      const Matrix new_xb = X.linear_predictor(beta);
      change = std::max(change, (new_xb - xb).cwiseAbs().maxCoeff());
      xb = new_xb;
      fit.beta = beta;
    }
    {
      Matrix r = y - xb;
      r.rowwise() -= fit.b.transpose();
      const Vector a = r.cwiseProduct(w).rowwise().sum().cwiseQuotient(row_count);
      change = std::max(change, (a - fit.a).cwiseAbs().maxCoeff());
      fit.a = a;
    }
    {
      Matrix r = y - xb;
      r.colwise() -= fit.a;
      const Vector b = r.cwiseProduct(w).colwise().sum().transpose().cwiseQuotient(col_count);
      change = std::max(change, (b - fit.b).cwiseAbs().maxCoeff());
      fit.b = b;
    }
    if (change < tol * scale) break;
  }

  fit.resid = y - xb;
  fit.resid.colwise() -= fit.a;
  fit.resid.rowwise() -= fit.b.transpose();
  fit.resid = fit.resid.cwiseProduct(w);
  return fit;
}

}  // namespace ame
