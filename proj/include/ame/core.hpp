#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ame {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Matrix2 = Eigen::Matrix2d;
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Malformed or inconsistent input data (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sampler or linear-algebra step failed (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DataKind { continuous, binary, ordinal, frn };

std::string to_string(DataKind kind);
DataKind data_kind_from_string(const std::string& name);

/// Square relational data with an undefined diagonal.
///
/// `values(i, j)` is the relation from node i to node j. Cells with
/// `mask(i, j) == false` are missing; the diagonal is always missing.
/// Ordinal data are stored recoded to 0..L-1 with the original labels kept
/// in `levels`.
class Sociomatrix {
 public:
  static Sociomatrix make(Matrix values, Mask mask, DataKind kind,
                          int frn_max = 0,
                          std::vector<std::string> labels = {});

  int n() const { return static_cast<int>(values_.rows()); }
  const Matrix& values() const { return values_; }
  const Mask& mask() const { return mask_; }
  DataKind kind() const { return kind_; }
  int frn_max() const { return frn_max_; }
  const std::vector<std::string>& labels() const { return labels_; }
  /// Original ordinal labels; level k of the recoded data is `levels()[k]`.
  const std::vector<double>& levels() const { return levels_; }
  int level_count() const { return static_cast<int>(levels_.size()); }
  bool observed(int i, int j) const { return mask_(i, j); }
  int observed_count() const;

 private:
  Matrix values_;
  Mask mask_;
  DataKind kind_ = DataKind::continuous;
  int frn_max_ = 0;
  std::vector<std::string> labels_;
  std::vector<double> levels_;
};

/// n x n x p regressor array; `slice(k)(i, j)` is the k-th entry of x_{i,j}.
class DyadicDesign {
 public:
  DyadicDesign() = default;
  DyadicDesign(int n, std::vector<Matrix> slices, std::vector<std::string> names);

  int n() const { return n_; }
  int p() const { return static_cast<int>(slices_.size()); }
  const Matrix& slice(int k) const { return slices_[k]; }
  const std::vector<Matrix>& slices() const { return slices_; }
  const std::vector<std::string>& names() const { return names_; }
  Vector at(int i, int j) const;
  /// M(X, beta) = sum_k beta_k X_k.
  Matrix linear_predictor(const Vector& beta) const;
  /// X as the n^2 x p matrix of column-major vectorized slices.
  Matrix stacked() const;

 private:
  int n_ = 0;
  std::vector<Matrix> slices_;
  std::vector<std::string> names_;
};

struct SrmParams {
  Matrix2 Sigma = Matrix2::Identity();
  double sigma2 = 1.0;
  double rho = 0.0;
  Vector a;
  Vector b;

  void validate() const;
};

struct MultiplicativeEffects {
  int rank = 0;
  Matrix U;  // n x r
  Matrix V;  // n x r
  Matrix Psi;  // 2r x 2r over the stacked (u_i, v_i)

  static MultiplicativeEffects zeros(int n, int rank);
  Matrix uv() const;
  Matrix psi_uv() const { return Psi.topRightCorner(rank, rank); }
  void validate() const;
};

struct PriorSpec {
  Vector beta0;
  Matrix Q0;
  double nu0 = 2.0;
  double sigma02 = 1.0;
  Matrix2 Sigma0 = Matrix2::Identity();
  double eta0 = 4.0;
  Matrix Psi0;
  double kappa0 = 2.0;
  int rho_grid = 400;

  /// beta0 = 0, Q0 = I/100, nu0 = 2, sigma02 = 1, Sigma0 = I, eta0 = 4,
  /// Psi0 = I, kappa0 = 2r + 2, 400-point uniform grid for rho.
  static PriorSpec defaults(int p, int rank);
  void validate(int p, int rank) const;
};

struct ChainState {
  Vector beta;
  SrmParams srm;
  MultiplicativeEffects mult;
  Matrix Y;  // complete latent / imputed outcome matrix
  std::uint64_t rng_seed = 0;
  long iteration = 0;
};

enum class PairType { variance, same_row, same_column, row_column, reciprocal, disjoint };

PairType pair_type_from_string(const std::string& name);

/// Covariance between two relations under the social relations model.
double srm_covariance(PairType pair_type, const Matrix2& Sigma, double sigma2, double rho);
double srm_covariance(const std::string& pair_type, const Matrix2& Sigma, double sigma2,
                      double rho);

/// Builds x_{i,j} = (1?, x_{r,i}, x_{c,j}, x_{d,i,j}).
///
/// `row_covariates` and `col_covariates` are n x p_r and n x p_c (zero columns
/// allowed); `dyad_covariates` holds p_d n x n matrices.
DyadicDesign build_design(const Matrix& row_covariates, const Matrix& col_covariates,
                          const std::vector<Matrix>& dyad_covariates, bool intercept,
                          std::vector<std::string> row_names = {},
                          std::vector<std::string> col_names = {},
                          std::vector<std::string> dyad_names = {});

/// Dyadic covariate x_i * x_j formed from a nodal covariate.
Matrix homophily(const Vector& x);

}  // namespace ame
