#include "ame/simulate.hpp"

#include "ame/linalg.hpp"
#include "ame/srrm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ame {

Matrix simulate_srm_noise(int n, double sigma2, double rho, Random& rng) {
  const DecorrelationConstants k = decorrelation_constants(sigma2, rho);
  return correlate(rng.normal_matrix(n, n), k);
}

void SimulationSpec::validate() const {
  if (n < 3) throw DataError("simulation needs n >= 3");
  if (design.p() > 0 && design.n() != n) throw DataError("design size does not match n");
  if (beta.size() != design.p()) throw DataError("beta length does not match the design");
  if (!(sigma2 > 0.0)) throw DataError("sigma2 must be positive");
  if (!(rho > -1.0 && rho < 1.0)) throw DataError("rho must lie in (-1, 1)");
  if (rank < 0) throw DataError("rank must be non-negative");
  if (rank > 0 && (Psi.rows() != 2 * rank || Psi.cols() != 2 * rank))
    throw DataError("Psi must be 2r x 2r");
  if (kind == DataKind::ordinal && thresholds.empty() && ordinal_levels < 2)
    throw DataError("ordinal simulation needs at least two levels");
  if (kind == DataKind::frn && frn_max < 1) throw DataError("frn simulation needs m >= 1");
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw DataError("ordinal thresholds must be increasing");
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw DataError("missing rate must lie in [0, 1)");
}

std::vector<double> equal_mass_thresholds(int levels) {
  std::vector<double> t;
  for (int k = 1; k < levels; ++k) t.push_back(normal_quantile(static_cast<double>(k) / levels));
  return t;
}

Sociomatrix observe(const Matrix& Y, const Mask& mask, DataKind kind,
                    const std::vector<double>& thresholds, int frn_max,
                    std::vector<std::string> labels) {
  const Eigen::Index n = Y.rows();
  Matrix S = Matrix::Zero(n, n);
  switch (kind) {
    case DataKind::continuous:
      S = Y;
      break;
    case DataKind::binary:
      S = (Y.array() > 0.0).cast<double>();
      break;
    case DataKind::ordinal:
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          S(i, j) = static_cast<double>(
              std::upper_bound(thresholds.begin(), thresholds.end(), Y(i, j)) - thresholds.begin());
      break;
    case DataKind::frn:
      for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<Eigen::Index> positive;
        for (Eigen::Index j = 0; j < n; ++j)
          if (j != i && mask(i, j) && Y(i, j) > 0.0) positive.push_back(j);
        std::sort(positive.begin(), positive.end(),
                  [&](Eigen::Index x, Eigen::Index y) { return Y(i, x) > Y(i, y); });
        const auto ranked = std::min<std::size_t>(frn_max, positive.size());
        for (std::size_t k = 0; k < ranked; ++k) S(i, positive[k]) = static_cast<double>(frn_max - k);
      }
      break;
  }
  return Sociomatrix::make(S, mask, kind, frn_max, std::move(labels));
}

Simulation simulate_ame(const SimulationSpec& spec, Random& rng) {
  spec.validate();
  const int n = spec.n;
  Simulation sim;

  sim.M = spec.design.p() > 0 ? spec.design.linear_predictor(spec.beta) : Matrix::Zero(n, n);

  const Matrix ab = rng.normal_matrix(n, 2) * sym_sqrt(spec.Sigma, "Sigma");
  sim.a = ab.col(0);
  sim.b = ab.col(1);

  if (spec.rank > 0) {
    const Matrix uv = rng.normal_matrix(n, 2 * spec.rank) * sym_sqrt(spec.Psi, "Psi");
    sim.U = uv.leftCols(spec.rank);
    sim.V = uv.rightCols(spec.rank);
  } else {
    sim.U = Matrix::Zero(n, 0);
    sim.V = Matrix::Zero(n, 0);
  }

  sim.E = simulate_srm_noise(n, spec.sigma2, spec.rho, rng);
  sim.Y = sim.M + sim.U * sim.V.transpose() + sim.E;
  sim.Y.colwise() += sim.a;
  sim.Y.rowwise() += sim.b.transpose();

  Mask mask = Mask::Constant(n, n, true);
  if (spec.missing_rate > 0.0)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (rng.uniform() < spec.missing_rate) mask(i, j) = false;
  for (int i = 0; i < n; ++i) mask(i, i) = false;

  sim.thresholds = spec.thresholds;
  if (spec.kind == DataKind::ordinal && sim.thresholds.empty())
    sim.thresholds = equal_mass_thresholds(spec.ordinal_levels);

  sim.S = observe(sim.Y, mask, spec.kind, sim.thresholds, spec.frn_max);
  return sim;
}

}  // namespace ame
