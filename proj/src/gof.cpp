#include "ame/gof.hpp"

#include "ame/simulate.hpp"
#include "ame/srm_descriptive.hpp"

#include <algorithm>
#include <cmath>

namespace ame {

double triadic_stat(const Matrix& E) {
  if (E.rows() != E.cols()) throw DataError("triadic statistic needs a square matrix");
  if (E.rows() < 3) throw DataError("triadic statistic needs n >= 3");
  Matrix Z = E;
  Z.diagonal().setZero();
  // with a zero diagonal every term of tr(Z^3) with a repeated index vanishes
  return (Z * Z).cwiseProduct(Z.transpose()).sum();
}

Matrix gof_residuals(const Sociomatrix& S, const DyadicDesign& X) {
  return additive_least_squares(S.values(), S.mask(), X).resid;
}

Sociomatrix replicate_data(const Draw& draw, const Sociomatrix& S, const DyadicDesign& X,
                           Random& rng) {
  const int n = S.n();
  Matrix Y = simulate_srm_noise(n, draw.sigma2, draw.rho, rng);
  if (X.p() > 0) Y += X.linear_predictor(draw.beta);
  Y.colwise() += draw.a;
  Y.rowwise() += draw.b.transpose();
  if (draw.U.cols() > 0) Y += draw.U * draw.V.transpose();

  std::vector<double> thresholds;
  if (S.kind() == DataKind::ordinal) {
    std::vector<double> counts(S.level_count(), 0.0);
    std::vector<double> latent;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (S.observed(i, j)) {
          counts[static_cast<int>(S.values()(i, j))] += 1.0;
          latent.push_back(Y(i, j));
        }
    std::sort(latent.begin(), latent.end());
    double cumulative = 0.0;
    for (int l = 0; l + 1 < S.level_count(); ++l) {
      cumulative += counts[l];
      const auto idx = static_cast<std::size_t>(cumulative);
      // cut between the last cell of level l and the first of level l + 1
      const double lo = idx > 0 ? latent[idx - 1] : latent.front() - 1.0;
      const double hi = idx < latent.size() ? latent[idx] : latent.back() + 1.0;
      thresholds.push_back(0.5 * (lo + hi));
    }
  }
  Sociomatrix rep = observe(Y, S.mask(), S.kind(), thresholds, std::max(S.frn_max(), 1), S.labels());
  return rep;
}

double GofResult::quantile(double q) const {
  if (replicates.empty()) throw DataError("no predictive replicates");
  std::vector<double> sorted = replicates;
  std::sort(sorted.begin(), sorted.end());
  // linear interpolation between order statistics
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

bool GofResult::inside_central(double level) const {
  const double tail = 0.5 * (1.0 - level);
  return observed >= quantile(tail) && observed <= quantile(1.0 - tail);
}

GofResult posterior_predictive_gof(const PosteriorSamples& samples, const Sociomatrix& S,
                                   const DyadicDesign& X, Random& rng) {
  if (samples.draws.empty()) throw DataError("posterior predictive check needs stored draws");
  GofResult out;
  out.observed = triadic_stat(gof_residuals(S, X));
  out.replicates.reserve(samples.draws.size());
  double above = 0.0, below = 0.0;
  for (const Draw& draw : samples.draws) {
    const double t = triadic_stat(gof_residuals(replicate_data(draw, S, X, rng), X));
    out.replicates.push_back(t);
    if (t >= out.observed) above += 1.0;
    if (t <= out.observed) below += 1.0;
  }
  const double m = static_cast<double>(out.replicates.size());
  out.tail_probability = std::min(1.0, 2.0 * std::min(above, below) / m);
  return out;
}

}  // namespace ame
