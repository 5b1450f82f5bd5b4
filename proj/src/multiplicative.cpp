#include "ame/multiplicative.hpp"

#include "ame/linalg.hpp"

#include <cmath>
#include <numeric>

namespace ame {

Matrix psi_wishart_update(const Matrix& U, const Matrix& V, const Matrix& Psi0, double kappa0,
                          Random& rng) {
  if (U.rows() != V.rows() || U.cols() != V.cols()) throw DataError("U and V must match");
  Matrix UV(U.rows(), U.cols() + V.cols());
  UV << U, V;
  const Matrix scale = spd_inverse(kappa0 * Psi0 + UV.transpose() * UV, "kappa0 Psi0 + [U V]^T [U V]");
  const Matrix precision = sample_wishart(scale, kappa0 + static_cast<double>(U.rows()), rng);
  return spd_inverse(precision, "Psi^{-1} draw");
}

FactorPrior factor_prior_conditional(const Matrix& Psi, const Matrix& U, const Matrix& V,
                                     int coord) {
  const int r = static_cast<int>(U.cols());
  const int dim = 2 * r;
  const Eigen::Index n = U.rows();
  FactorPrior prior;
  if (dim == 1) {
    prior.mean = Vector::Zero(n);
    prior.var = Psi(0, 0);
    return prior;
  }
  std::vector<int> rest;
  for (int c = 0; c < dim; ++c)
    if (c != coord) rest.push_back(c);
  const auto m = static_cast<Eigen::Index>(rest.size());
  Matrix others(n, m);
  Matrix psi_rest(m, m);
  Vector psi_cross(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const int ca = rest[a];
    others.col(a) = ca < r ? U.col(ca) : V.col(ca - r);
    psi_cross(a) = Psi(coord, ca);
    for (Eigen::Index b = 0; b < m; ++b) psi_rest(a, b) = Psi(ca, rest[b]);
  }
  Eigen::LLT<Matrix> llt(psi_rest);
  if (llt.info() != Eigen::Success) throw NumericalError("Psi block not positive definite");
  const Vector weights = llt.solve(psi_cross);
  prior.mean = others * weights;
  prior.var = Psi(coord, coord) - psi_cross.dot(weights);
  if (!(prior.var > 0.0)) throw NumericalError("non-positive conditional factor variance");
  return prior;
}

Matrix FactorColumnConditional::precision() const {
  const Eigen::Index n = v.size();
  return (1.0 / prior.var + ww_scale) * Matrix::Identity(n, n) + ww_rank_one * v * v.transpose();
}

Matrix FactorColumnConditional::covariance() const {
  const Eigen::Index n = v.size();
  const double alpha = 1.0 / prior.var + ww_scale;
  const double vv = v.squaredNorm();
  return (Matrix::Identity(n, n) - (ww_rank_one / (alpha + ww_rank_one * vv)) * v * v.transpose()) /
         alpha;
}

Vector FactorColumnConditional::sample(Random& rng) const {
  const double alpha = 1.0 / prior.var + ww_scale;
  const double vv = v.squaredNorm();
  const Vector z = rng.normal_vector(v.size());
  Vector out = mean + z / std::sqrt(alpha);
  if (vv > 0.0) {
    const double along = alpha + ww_rank_one * vv;
    if (!(along > 0.0)) throw NumericalError("factor posterior precision not positive definite");
    const Vector proj = v * (v.dot(z) / vv);
    out += proj * (1.0 / std::sqrt(along) - 1.0 / std::sqrt(alpha));
  }
  return out;
}

FactorColumnConditional factor_conditional_moments(const Matrix& Rt, const Vector& v,
                                                   const DecorrelationConstants& k,
                                                   const FactorPrior& prior) {
  if (!(prior.var > 0.0)) throw NumericalError("factor prior variance must be positive");
  FactorColumnConditional fc;
  fc.v = v;
  fc.prior = prior;
  fc.ww_scale = (k.c_t * k.c_t + k.d_t * k.d_t) * v.squaredNorm();
  fc.ww_rank_one = 2.0 * k.c_t * k.d_t;
  fc.wtr = k.c_t * (Rt * v) + k.d_t * (Rt.transpose() * v);

  const double alpha = 1.0 / prior.var + fc.ww_scale;
  const double vv = v.squaredNorm();
  const Vector linear = prior.mean / prior.var + fc.wtr;
  // Sherman-Morrison on alpha I + w v v^T
  fc.mean = (linear - v * (fc.ww_rank_one * v.dot(linear) / (alpha + fc.ww_rank_one * vv))) / alpha;
  return fc;
}

void update_factor_columns(ChainState& state, const DyadicDesign& X, Random& rng,
                           const FactorUpdateOptions& options) {
  MultiplicativeEffects& mult = state.mult;
  const int r = mult.rank;
  if (r == 0) return;
  std::vector<int> order = options.order;
  if (order.empty()) {
    order.resize(r);
    std::iota(order.begin(), order.end(), 0);
  }
  const DecorrelationConstants k = decorrelation_constants(state.srm.sigma2, state.srm.rho);

  Matrix base = state.Y - X.linear_predictor(state.beta);
  base.colwise() -= state.srm.a;
  base.rowwise() -= state.srm.b.transpose();
  Matrix full_uv = mult.U * mult.V.transpose();

  for (int col : order) {
    const Matrix R = base - (full_uv - mult.U.col(col) * mult.V.col(col).transpose());
    const Matrix Rt = decorrelate(R, k);

    auto update_u = [&] {
      const FactorPrior prior = factor_prior_conditional(mult.Psi, mult.U, mult.V, col);
      mult.U.col(col) = factor_conditional_moments(Rt, mult.V.col(col), k, prior).sample(rng);
    };
    auto update_v = [&] {
      // R^T = v u^T + E^T and E^T has the same dyadic law as E
      const FactorPrior prior = factor_prior_conditional(mult.Psi, mult.U, mult.V, r + col);
      mult.V.col(col) =
          factor_conditional_moments(Rt.transpose(), mult.U.col(col), k, prior).sample(rng);
    };
    if (options.v_first) {
      update_v();
      update_u();
    } else {
      update_u();
      update_v();
    }
    full_uv = mult.U * mult.V.transpose();
  }
}

}  // namespace ame
