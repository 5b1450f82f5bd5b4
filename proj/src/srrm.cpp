#include "ame/srrm.hpp"

#include "ame/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace ame {

Matrix2 DecorrelationConstants::sqrt_cov() const {
  Matrix2 m;
  m << c, d, d, c;
  return m;
}

Matrix2 DecorrelationConstants::inv_sqrt_cov() const {
  Matrix2 m;
  m << c_t, d_t, d_t, c_t;
  return m;
}

DecorrelationConstants decorrelation_constants(double sigma2, double rho) {
  if (!(sigma2 > 0.0)) throw NumericalError("sigma2 must be positive");
  if (!(std::abs(rho) < 1.0)) throw NumericalError("rho must lie in (-1, 1)");
  const double sigma = std::sqrt(sigma2);
  const double p = std::sqrt(1.0 + rho);
  const double m = std::sqrt(1.0 - rho);
  DecorrelationConstants k;
  k.c = sigma * (p + m) / 2.0;
  k.d = sigma * (p - m) / 2.0;
  k.c_t = (1.0 / p + 1.0 / m) / (2.0 * sigma);
  k.d_t = (1.0 / p - 1.0 / m) / (2.0 * sigma);
  return k;
}

Matrix decorrelate(const Matrix& Y, const DecorrelationConstants& k) {
  if (!Y.allFinite()) throw DataError("decorrelate needs a complete matrix; impute first");
  return k.c_t * Y + k.d_t * Y.transpose();
}

Matrix correlate(const Matrix& Z, const DecorrelationConstants& k) {
  return k.c * Z + k.d * Z.transpose();
}

DyadicDesign transform_design(const DyadicDesign& X, const DecorrelationConstants& k) {
  std::vector<Matrix> slices;
  slices.reserve(X.p());
  for (const auto& s : X.slices()) slices.push_back(k.c_t * s + k.d_t * s.transpose());
  return DyadicDesign(X.n(), std::move(slices), X.names());
}

DyadicSums DyadicSums::from(const Matrix& E) {
  DyadicSums s;
  s.n = static_cast<int>(E.rows());
  for (Eigen::Index j = 0; j < E.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double x = E(i, j), y = E(j, i);
      s.off_sq += x * x + y * y;
      s.cross += x * y;
    }
    s.diag_sq += E(j, j) * E(j, j);
  }
  return s;
}

double DyadicSums::ss1(double rho) const { return (off_sq - 2.0 * rho * cross) / (1.0 - rho * rho); }
double DyadicSums::ss2(double rho) const { return diag_sq / (1.0 + rho); }

Sigma2Conditional sigma2_full_conditional_params(const Matrix& E, double rho, double nu0,
                                                 double sigma02) {
  if (!(std::abs(rho) < 1.0)) throw NumericalError("rho must lie in (-1, 1)");
  const DyadicSums sums = DyadicSums::from(E);
  const double n = static_cast<double>(E.rows());
  Sigma2Conditional out;
  out.ss1 = sums.ss1(rho);
  out.ss2 = sums.ss2(rho);
  out.shape = (nu0 + n * n) / 2.0;
  out.rate = (nu0 * sigma02 + out.ss1 + out.ss2) / 2.0;
  return out;
}

double rho_log_density(const DyadicSums& sums, double sigma2, double rho) {
  const double n = sums.n;
  const double pairs = n * (n - 1.0) / 2.0;
  return -0.5 * n * n * std::log(sigma2) - 0.5 * pairs * std::log1p(-rho * rho) -
         0.5 * n * std::log1p(rho) - (sums.ss1(rho) + sums.ss2(rho)) / (2.0 * sigma2);
}

std::vector<double> rho_grid(int resolution) {
  std::vector<double> grid(resolution);
  const double width = 2.0 / resolution;
  for (int k = 0; k < resolution; ++k) grid[k] = -1.0 + (k + 0.5) * width;
  return grid;
}

std::vector<double> rho_grid_log_density(const Matrix& E, double sigma2, int resolution) {
  if (!(sigma2 > 0.0)) throw NumericalError("sigma2 must be positive");
  const DyadicSums sums = DyadicSums::from(E);
  auto grid = rho_grid(resolution);
  for (double& r : grid) r = rho_log_density(sums, sigma2, r);
  return grid;
}

double rho_grid_update(const Matrix& E, double sigma2, int resolution, Random& rng) {
  const auto logd = rho_grid_log_density(E, sigma2, resolution);
  const std::size_t k = rng.categorical_log(logd);
  const double width = 2.0 / resolution;
  const double lo = -1.0 + static_cast<double>(k) * width;
  const double rho = lo + width * rng.uniform();
  return std::clamp(rho, -1.0 + 1e-12, 1.0 - 1e-12);
}

Matrix2 sigma_wishart_update(const Vector& a, const Vector& b, const Matrix2& Sigma0, double eta0,
                             Random& rng) {
  if (a.size() != b.size()) throw DataError("a and b must have equal length");
  Matrix F(a.size(), 2);
  F.col(0) = a;
  F.col(1) = b;
  const Matrix scale = spd_inverse(eta0 * Sigma0 + F.transpose() * F, "eta0 Sigma0 + F^T F");
  const Matrix precision = sample_wishart(scale, eta0 + static_cast<double>(a.size()), rng);
  return spd_inverse(precision, "Sigma^{-1} draw");
}

Matrix AdditiveFullConditional::mean() const {
  const Eigen::RowVector2d shift = t * (H.colwise().sum());
  Matrix m = S * G;
  m.rowwise() -= shift;
  return m;
}

Matrix AdditiveFullConditional::dense_covariance() const {
  const int size = n();
  const Matrix ones = Matrix::Ones(size, size);
  Matrix out(2 * size, 2 * size);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      out.block(r * size, c * size, size, size) =
          G(r, c) * Matrix::Identity(size, size) - H(r, c) * ones;
  return out;
}

void additive_gh(const Matrix2& Sigma_tilde, int n, Matrix2& G, Matrix2& H) {
  const Matrix2 prec = spd_inverse(Sigma_tilde, "Sigma~");
  G = (prec + n * Matrix2::Identity()).inverse();
  Matrix2 swap;
  swap << 0.0, 1.0, 1.0, 0.0;
  H = (prec + n * Matrix2::Ones()).inverse() * swap * G;
  // H is symmetric in exact arithmetic
  H = 0.5 * (H + H.transpose()).eval();
}

AdditiveFullConditional additive_effects_suffstats(const Matrix& R, const Matrix2& Sigma_tilde) {
  AdditiveFullConditional st;
  const int n = static_cast<int>(R.rows());
  additive_gh(Sigma_tilde, n, st.G, st.H);
  st.S.resize(n, 2);
  st.S.col(0) = R.rowwise().sum();
  st.S.col(1) = R.colwise().sum().transpose();
  st.t = R.sum();
  return st;
}

Matrix sample_additive_effects(const AdditiveFullConditional& stats, Random& rng) {
  const int n = stats.n();
  const Matrix2 shared = stats.G - n * stats.H;
  const Matrix shared_root = sym_sqrt(shared, "G - nH");
  const Matrix contrast_root = sym_sqrt(stats.G, "G");

  // constant-vector component: 1 z^T with z ~ N(0, (G - nH)/n) per coordinate
  const Eigen::RowVector2d z_shared =
      (rng.normal_vector(2).transpose() * shared_root) / std::sqrt(static_cast<double>(n));
  Matrix z2 = rng.normal_matrix(n, 2);
  z2.rowwise() -= z2.colwise().mean();  // (I - 11^T/n) Z2
  Matrix noise = z2 * contrast_root;
  noise.rowwise() += z_shared;
  return stats.mean() + noise;
}

BetaSuffStats beta_suffstats(const Matrix& Yt, const DyadicDesign& Xt, const Matrix2& G,
                             const Matrix2& H) {
  const int n = Xt.n();
  const int p = Xt.p();
  const double dn = n;

  BetaSuffStats st;
  st.Q1.resize(p, p);
  st.l1.resize(p);
  st.xbar.resize(p);
  st.Xr.resize(n, p);
  st.Xc.resize(n, p);
  for (int k = 0; k < p; ++k) {
    const Matrix& xk = Xt.slice(k);
    for (int l = 0; l <= k; ++l) {
      st.Q1(k, l) = st.Q1(l, k) = xk.cwiseProduct(Xt.slice(l)).sum();
    }
    st.l1(k) = xk.cwiseProduct(Yt).sum();
    st.xbar(k) = xk.mean();
    st.Xr.col(k) = xk.rowwise().mean();
    st.Xc.col(k) = xk.colwise().mean().transpose();
  }
  st.yr = Yt.rowwise().mean();
  st.yc = Yt.colwise().mean().transpose();
  const double ybar = Yt.mean();

  st.h = H.sum();
  const double n4h = dn * dn * dn * dn * st.h;
  st.Q2 = n4h * st.xbar * st.xbar.transpose();
  st.l2 = n4h * ybar * st.xbar;

  const double n2 = dn * dn;
  const Matrix rc = st.Xr.transpose() * st.Xc;
  st.Q3 = -n2 * (G(0, 0) * st.Xr.transpose() * st.Xr + G(0, 1) * (rc + rc.transpose()) +
                 G(1, 1) * st.Xc.transpose() * st.Xc);
  st.l3 = -n2 * (G(0, 0) * st.Xr.transpose() * st.yr +
                 G(0, 1) * (st.Xr.transpose() * st.yc + st.Xc.transpose() * st.yr) +
                 G(1, 1) * st.Xc.transpose() * st.yc);
  return st;
}

BetaSuffStats beta_suffstats(const Matrix& Yt, const DyadicDesign& Xt,
                             const AdditiveFullConditional& stats) {
  return beta_suffstats(Yt, Xt, stats.G, stats.H);
}

double BetaConditional::log_density(const Vector& beta) const {
  return -0.5 * beta.dot(precision * beta) + beta.dot(linear);
}

BetaConditional beta_full_conditional(const BetaSuffStats& stats, const Vector& beta0,
                                      const Matrix& Q0) {
  BetaConditional out;
  out.precision = Q0 + stats.Q();
  out.precision = 0.5 * (out.precision + out.precision.transpose()).eval();
  out.linear = Q0 * beta0 + stats.l();
  Eigen::LLT<Matrix> llt(out.precision);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("beta posterior precision Q0 + Q is not positive definite");
  }
  out.mean = llt.solve(out.linear);
  out.cov = llt.solve(Matrix::Identity(out.precision.rows(), out.precision.cols()));
  return out;
}

Matrix cell_means(const ChainState& state, const DyadicDesign& X) {
  Matrix mu = X.linear_predictor(state.beta);
  mu.colwise() += state.srm.a;
  mu.rowwise() += state.srm.b.transpose();
  if (state.mult.rank > 0) mu += state.mult.U * state.mult.V.transpose();
  return mu;
}

void impute_missing_Y(ChainState& state, const Mask& observed, const DyadicDesign& X,
                      Random& rng) {
  const Matrix mu = cell_means(state, X);
  const double s2 = state.srm.sigma2;
  const double rho = state.srm.rho;
  const Eigen::Index n = mu.rows();
  Matrix& Y = state.Y;
  for (Eigen::Index i = 0; i < n; ++i) {
    Y(i, i) = rng.normal(mu(i, i), std::sqrt(s2 * (1.0 + rho)));
  }
  const double sd_cond = std::sqrt(s2 * (1.0 - rho * rho));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const bool oij = observed(i, j), oji = observed(j, i);
      if (oij && oji) continue;
      if (!oij && !oji) {
        // bivariate: y_ij marginal, then y_ji given y_ij
        Y(i, j) = rng.normal(mu(i, j), std::sqrt(s2));
        Y(j, i) = rng.normal(mu(j, i) + rho * (Y(i, j) - mu(i, j)), sd_cond);
      } else if (oij) {
        Y(j, i) = rng.normal(mu(j, i) + rho * (Y(i, j) - mu(i, j)), sd_cond);
      } else {
        Y(i, j) = rng.normal(mu(i, j) + rho * (Y(j, i) - mu(j, i)), sd_cond);
      }
    }
  }
}

void srrm_gibbs_step(ChainState& state, const Mask& observed, const DyadicDesign& X,
                     const PriorSpec& prior, Random& rng, const SrrmStepOptions& options) {
  SrmParams& srm = state.srm;
  const int n = static_cast<int>(state.Y.rows());
  const Matrix y_eff = state.mult.rank > 0 ? Matrix(state.Y - state.mult.uv()) : state.Y;

  // 1. {beta, a, b} on the decorrelated scale
  {
    const DecorrelationConstants k = decorrelation_constants(srm.sigma2, srm.rho);
    const Matrix yt = decorrelate(y_eff, k);
    const DyadicDesign xt = transform_design(X, k);
    const Matrix2 inv_root = k.inv_sqrt_cov();
    const Matrix2 sigma_t = inv_root * srm.Sigma * inv_root;
    Matrix2 G, H;
    additive_gh(sigma_t, n, G, H);

    Matrix resid = yt;
    if (X.p() > 0) {
      const BetaSuffStats bs = beta_suffstats(yt, xt, G, H);
      const BetaConditional bc = beta_full_conditional(bs, prior.beta0, prior.Q0);
      state.beta = sample_mvn(bc.mean, bc.cov, rng);
      resid -= xt.linear_predictor(state.beta);
    }
    const AdditiveFullConditional st = additive_effects_suffstats(resid, sigma_t);
    const Matrix f_t = sample_additive_effects(st, rng);
    const Matrix f = f_t * k.sqrt_cov();  // rows: Sigma_e^{1/2} (a~_i, b~_i)
    srm.a = f.col(0);
    srm.b = f.col(1);
  }

  Matrix E = y_eff - X.linear_predictor(state.beta);
  E.colwise() -= srm.a;
  E.rowwise() -= srm.b.transpose();

  // 2. sigma^2
  if (options.update_sigma2) {
    const Sigma2Conditional sc = sigma2_full_conditional_params(E, srm.rho, prior.nu0, prior.sigma02);
    srm.sigma2 = 1.0 / rng.gamma(sc.shape, sc.rate);
  }
  // 3. rho
  srm.rho = rho_grid_update(E, srm.sigma2, prior.rho_grid, rng);
  // 4. Sigma
  srm.Sigma = sigma_wishart_update(srm.a, srm.b, prior.Sigma0, prior.eta0, rng);
  // 5. missing Y
  if (options.impute_missing) impute_missing_Y(state, observed, X, rng);
}

}  // namespace ame
