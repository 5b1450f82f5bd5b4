#include "ame/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace ame {

std::string to_string(DataKind kind) {
  switch (kind) {
    case DataKind::continuous: return "gaussian";
    case DataKind::binary: return "binary";
    case DataKind::ordinal: return "ordinal";
    case DataKind::frn: return "frn";
  }
  return "unknown";
}

DataKind data_kind_from_string(const std::string& name) {
  if (name == "gaussian" || name == "continuous" || name == "normal") return DataKind::continuous;
  if (name == "binary" || name == "probit") return DataKind::binary;
  if (name == "ordinal") return DataKind::ordinal;
  if (name == "frn") return DataKind::frn;
  throw DataError("unknown family '" + name + "'");
}

Sociomatrix Sociomatrix::make(Matrix values, Mask mask, DataKind kind, int frn_max,
                              std::vector<std::string> labels) {
  const auto n = values.rows();
  if (values.cols() != n || mask.rows() != n || mask.cols() != n) {
    throw DataError("sociomatrix must be square with a matching mask");
  }
  if (n < 3) throw DataError("sociomatrix needs at least 3 nodes");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != n) {
    throw DataError("label count does not match sociomatrix size");
  }
  if (labels.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) labels.push_back(std::to_string(i + 1));
  }

  Sociomatrix s;
  for (Eigen::Index i = 0; i < n; ++i) mask(i, i) = false;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!mask(i, j)) {
        values(i, j) = std::numeric_limits<double>::quiet_NaN();
      } else if (!std::isfinite(values(i, j))) {
        throw DataError("non-finite observed value at (" + std::to_string(i) + ", " +
                        std::to_string(j) + ")");
      }
    }
  }

  switch (kind) {
    case DataKind::continuous: break;
    case DataKind::binary:
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          if (mask(i, j) && values(i, j) != 0.0 && values(i, j) != 1.0)
            throw DataError("binary sociomatrix has value " + std::to_string(values(i, j)) +
                            " at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      s.levels_ = {0.0, 1.0};
      break;
    case DataKind::frn: {
      if (frn_max < 1) throw DataError("frn data need a nomination cap m >= 1");
      for (Eigen::Index i = 0; i < n; ++i) {
        int degree = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
          if (!mask(i, j)) continue;
          const double v = values(i, j);
          if (v != std::floor(v) || v < 0 || v > frn_max) {
            throw DataError("frn value " + std::to_string(v) + " outside {0..m} at (" +
                            std::to_string(i) + ", " + std::to_string(j) + ")");
          }
          if (v > 0) ++degree;
        }
        if (degree > frn_max) {
          throw DataError("row " + std::to_string(i) + " ranks " + std::to_string(degree) +
                          " nodes, more than the cap " + std::to_string(frn_max));
        }
      }
      for (int k = 0; k <= frn_max; ++k) s.levels_.push_back(k);
      break;
    }
    case DataKind::ordinal: {
      std::set<double> distinct;
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          if (mask(i, j)) distinct.insert(values(i, j));
      s.levels_.assign(distinct.begin(), distinct.end());
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          if (mask(i, j)) {
            const auto it = std::lower_bound(s.levels_.begin(), s.levels_.end(), values(i, j));
            values(i, j) = static_cast<double>(it - s.levels_.begin());
          }
      break;
    }
  }

  s.values_ = std::move(values);
  s.mask_ = std::move(mask);
  s.kind_ = kind;
  s.frn_max_ = kind == DataKind::frn ? frn_max : 0;
  s.labels_ = std::move(labels);
  return s;
}

int Sociomatrix::observed_count() const { return static_cast<int>(mask_.count()); }

DyadicDesign::DyadicDesign(int n, std::vector<Matrix> slices, std::vector<std::string> names)
    : n_(n), slices_(std::move(slices)), names_(std::move(names)) {
  if (names_.size() != slices_.size()) throw DataError("design names do not match slices");
  for (const auto& s : slices_) {
    if (s.rows() != n || s.cols() != n) throw DataError("design slice has wrong dimensions");
    if (!s.allFinite()) throw DataError("design contains non-finite entries");
  }
}

Vector DyadicDesign::at(int i, int j) const {
  Vector x(p());
  for (int k = 0; k < p(); ++k) x(k) = slices_[k](i, j);
  return x;
}

Matrix DyadicDesign::linear_predictor(const Vector& beta) const {
  Matrix m = Matrix::Zero(n_, n_);
  for (int k = 0; k < p(); ++k) m += beta(k) * slices_[k];
  return m;
}

Matrix DyadicDesign::stacked() const {
  Matrix x(static_cast<Eigen::Index>(n_) * n_, p());
  for (int k = 0; k < p(); ++k) x.col(k) = slices_[k].reshaped();
  return x;
}

void SrmParams::validate() const {
  Eigen::SelfAdjointEigenSolver<Matrix2> es(Sigma);
  if (std::abs(Sigma(0, 1) - Sigma(1, 0)) > 1e-12 || es.eigenvalues().minCoeff() <= 0.0) {
    throw DataError("Sigma must be symmetric positive definite");
  }
  if (!(sigma2 > 0.0)) throw DataError("sigma2 must be positive");
  if (!(std::abs(rho) < 1.0)) throw DataError("rho must lie in (-1, 1)");
}

MultiplicativeEffects MultiplicativeEffects::zeros(int n, int rank) {
  MultiplicativeEffects m;
  m.rank = rank;
  m.U = Matrix::Zero(n, rank);
  m.V = Matrix::Zero(n, rank);
  m.Psi = Matrix::Identity(2 * rank, 2 * rank);
  return m;
}

Matrix MultiplicativeEffects::uv() const {
  if (rank == 0) return Matrix::Zero(U.rows(), U.rows());
  return U * V.transpose();
}

void MultiplicativeEffects::validate() const {
  if (rank < 0) throw DataError("rank must be non-negative");
  if (U.cols() != rank || V.cols() != rank || U.rows() != V.rows()) {
    throw DataError("U and V must both be n x r");
  }
  if (rank == 0) return;
  if (Psi.rows() != 2 * rank || Psi.cols() != 2 * rank) throw DataError("Psi must be 2r x 2r");
  if ((Psi - Psi.transpose()).cwiseAbs().maxCoeff() > 1e-10) throw DataError("Psi not symmetric");
  Eigen::LLT<Matrix> llt(Psi);
  if (llt.info() != Eigen::Success) throw DataError("Psi not positive definite");
}

PriorSpec PriorSpec::defaults(int p, int rank) {
  PriorSpec prior;
  prior.beta0 = Vector::Zero(p);
  prior.Q0 = Matrix::Identity(p, p) / 100.0;
  prior.Psi0 = Matrix::Identity(2 * rank, 2 * rank);
  prior.kappa0 = 2.0 * rank + 2.0;
  return prior;
}

namespace {
bool is_spd(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + m.cwiseAbs().maxCoeff()))
    return false;
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}
}  // namespace

void PriorSpec::validate(int p, int rank) const {
  if (beta0.size() != p || Q0.rows() != p || !is_spd(Q0)) {
    throw DataError("beta prior must have p-vector mean and SPD p x p precision");
  }
  if (!(nu0 > 0) || !(sigma02 > 0)) throw DataError("nu0 and sigma02 must be positive");
  if (!is_spd(Sigma0) || !(eta0 >= 2)) throw DataError("Sigma0 must be SPD and eta0 >= 2");
  if (rank > 0 && (Psi0.rows() != 2 * rank || !is_spd(Psi0) || !(kappa0 >= 2 * rank))) {
    throw DataError("Psi0 must be SPD 2r x 2r and kappa0 >= 2r");
  }
  if (rho_grid < 2) throw DataError("rho grid needs at least two points");
}

PairType pair_type_from_string(const std::string& name) {
  if (name == "variance") return PairType::variance;
  if (name == "same_row") return PairType::same_row;
  if (name == "same_column") return PairType::same_column;
  if (name == "row_column") return PairType::row_column;
  if (name == "reciprocal") return PairType::reciprocal;
  if (name == "disjoint") return PairType::disjoint;
  throw DataError("unknown pair type '" + name + "'");
}

double srm_covariance(PairType pair_type, const Matrix2& Sigma, double sigma2, double rho) {
  switch (pair_type) {
    case PairType::variance: return Sigma(0, 0) + 2.0 * Sigma(0, 1) + Sigma(1, 1) + sigma2;
    case PairType::same_row: return Sigma(0, 0);
    case PairType::same_column: return Sigma(1, 1);
    case PairType::row_column: return Sigma(0, 1);
    case PairType::reciprocal: return 2.0 * Sigma(0, 1) + rho * sigma2;
    case PairType::disjoint: return 0.0;
  }
  throw DataError("invalid pair type");
}

double srm_covariance(const std::string& pair_type, const Matrix2& Sigma, double sigma2,
                      double rho) {
  return srm_covariance(pair_type_from_string(pair_type), Sigma, sigma2, rho);
}

DyadicDesign build_design(const Matrix& row_covariates, const Matrix& col_covariates,
                          const std::vector<Matrix>& dyad_covariates, bool intercept,
                          std::vector<std::string> row_names,
                          std::vector<std::string> col_names,
                          std::vector<std::string> dyad_names) {
  Eigen::Index n = -1;
  auto settle = [&](Eigen::Index rows, const char* what) {
    if (n < 0) n = rows;
    if (rows != n) throw DataError(std::string("dimension mismatch in ") + what);
  };
  if (row_covariates.cols() > 0) settle(row_covariates.rows(), "row covariates");
  if (col_covariates.cols() > 0) settle(col_covariates.rows(), "column covariates");
  for (const auto& d : dyad_covariates) {
    if (d.rows() != d.cols()) throw DataError("dyadic covariate must be square");
    settle(d.rows(), "dyadic covariates");
  }
  if (n < 0) {
    // intercept-only: size comes from whichever argument carries rows
    n = std::max(row_covariates.rows(), col_covariates.rows());
  }
  if (n <= 0) throw DataError("cannot infer node count for the design");
  if (!row_covariates.allFinite() || !col_covariates.allFinite()) {
    throw DataError("non-finite nodal covariate");
  }

  auto default_names = [](std::vector<std::string> names, Eigen::Index count,
                          const std::string& prefix) {
    if (names.empty()) {
      for (Eigen::Index k = 0; k < count; ++k) names.push_back(prefix + std::to_string(k + 1));
    }
    if (static_cast<Eigen::Index>(names.size()) != count) {
      throw DataError("covariate name count mismatch for " + prefix);
    }
    return names;
  };
  row_names = default_names(std::move(row_names), row_covariates.cols(), "row");
  col_names = default_names(std::move(col_names), col_covariates.cols(), "col");
  dyad_names = default_names(std::move(dyad_names),
                             static_cast<Eigen::Index>(dyad_covariates.size()), "dyad");

  std::vector<Matrix> slices;
  std::vector<std::string> names;
  if (intercept) {
    slices.push_back(Matrix::Ones(n, n));
    names.emplace_back("intercept");
  }
  for (Eigen::Index k = 0; k < row_covariates.cols(); ++k) {
    slices.push_back(row_covariates.col(k).replicate(1, n));
    names.push_back(row_names[k]);
  }
  for (Eigen::Index k = 0; k < col_covariates.cols(); ++k) {
    slices.push_back(col_covariates.col(k).transpose().replicate(n, 1));
    names.push_back(col_names[k]);
  }
  for (std::size_t k = 0; k < dyad_covariates.size(); ++k) {
    if (!dyad_covariates[k].allFinite()) {
      throw DataError("non-finite dyadic covariate '" + dyad_names[k] + "'");
    }
    slices.push_back(dyad_covariates[k]);
    names.push_back(dyad_names[k]);
  }
  return DyadicDesign(static_cast<int>(n), std::move(slices), std::move(names));
}

Matrix homophily(const Vector& x) { return x * x.transpose(); }

}  // namespace ame
