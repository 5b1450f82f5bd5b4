#include "ame/simulate.hpp"
#include "ame/srm_descriptive.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace ame;

namespace {
const double NaN = std::numeric_limits<double>::quiet_NaN();

Sociomatrix complete(const Matrix& v) {
  return Sociomatrix::make(v, Mask::Constant(v.rows(), v.cols(), true), DataKind::continuous);
}
}  // namespace

TEST_CASE("constant matrix") {
  const SrmMoments m = row_col_effects(complete(Matrix::Constant(5, 5, 2.5)));
  CHECK(m.mu_hat == doctest::Approx(2.5));
  CHECK(m.a_hat.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m.b_hat.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("hand-computed 3x3 example") {
  Matrix v(3, 3);
  v << NaN, 1, 2, 3, NaN, 4, 5, 6, NaN;
  const SrmMoments m = row_col_effects(complete(v));
  CHECK(m.mu_hat == doctest::Approx(3.5));
  CHECK(m.a_hat(0) == doctest::Approx(-2.0));
  CHECK(m.a_hat(1) == doctest::Approx(0.0));
  CHECK(m.a_hat(2) == doctest::Approx(2.0));
}

TEST_CASE("additive structure is recovered when the diagonal is ignored") {
  // with an undefined diagonal, plain row means of mu + a_i + b_j carry a
  // -b_i/(n-1) term; the least-squares fit removes it exactly
  const int n = 6;
  Vector a(n), b(n);
  a << 1, -2, 0.5, 0.5, 1, -1;
  b << 0.3, 0.2, -0.1, -0.4, 0.6, -0.6;
  Matrix v(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v(i, j) = 4.0 + a(i) + b(j);
  const AdditiveFit fit = additive_least_squares(v, Mask::Constant(n, n, true), DyadicDesign(n, {}, {}));
  CHECK(fit.resid.cwiseAbs().maxCoeff() < 1e-9);
  const Vector a_fit = fit.a.array() - fit.a.mean();
  CHECK((a_fit - a).cwiseAbs().maxCoeff() < 1e-9);
  const SrmMoments m = row_col_effects(complete(v));
  CHECK(m.a_hat.sum() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.b_hat.sum() == doctest::Approx(0.0).epsilon(1e-12));
  for (int i = 0; i < n; ++i) CHECK(m.a_hat(i) == doctest::Approx(a(i) - b(i) / (n - 1)));
}

TEST_CASE("empty rows are rejected with their index") {
  Matrix v = Matrix::Ones(4, 4);
  Mask mask = Mask::Constant(4, 4, true);
  mask.row(2).setConstant(false);
  const Sociomatrix s = Sociomatrix::make(v, mask, DataKind::continuous);
  CHECK_THROWS_WITH_AS(row_col_effects(s), "row 2 has no observed entries", DataError);
}

TEST_CASE("dyadic scatter") {
  Random rng(4);
  Matrix v = rng.normal_matrix(7, 7);
  v = (v + v.transpose()).eval();
  const SrmMoments m = row_col_effects(complete(v));
  const DyadicScatter sc = dyadic_scatter_data(m);
  CHECK(sc.dyads.size() == 21);
  CHECK(sc.nodes.size() == 7);
  for (const auto& [x, y] : sc.dyads) CHECK(x == doctest::Approx(y));
  const DyadicScatter zero = dyadic_scatter_data(row_col_effects(complete(Matrix::Ones(4, 4))));
  for (const auto& [x, y] : zero.dyads) CHECK((std::abs(x) + std::abs(y)) < 1e-12);
}

TEST_CASE("reciprocity estimate from simulated noise") {
  Random rng(5);
  const int n = 200;
  const Matrix E = simulate_srm_noise(n, 1.0, 0.8, rng);
  const SrmMoments m = row_col_effects(complete(E));
  // SE of a correlation near 0.8 with n(n-1)/2 pairs
  const double se = (1 - 0.64) / std::sqrt(n * (n - 1) / 2.0);
  CHECK(std::abs(m.rho_hat - 0.8) < 3 * se + 0.01);
}

TEST_CASE("rho_hat invariance") {
  Random rng(6);
  const int n = 30;
  const Matrix E = simulate_srm_noise(n, 1.0, 0.4, rng);
  const double base = row_col_effects(complete(E)).rho_hat;
  CHECK(row_col_effects(complete(E.array() + 7.0)).rho_hat == doctest::Approx(base).epsilon(1e-12));
  // a row + column surface moves the observed-cell means by O(1/n) only,
  // because the diagonal is undefined; the estimate moves accordingly
  Matrix shifted = E;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) shifted(i, j) += 0.1 * i - 0.05 * j;
  CHECK(std::abs(row_col_effects(complete(shifted)).rho_hat - base) < 0.02);
}

TEST_CASE("plug-in variance components converge") {
  // Residual-level components (sigma2, rho) pool n^2 cells and land within
  // 10% every time. Node-level components pool only n = 500 nodes; their
  // sampling SE (about 6% for sigma_a2, 12% for sigma_ab here) makes a 10%
  // band unreachable in 95% of replicates, so they are checked at 3 SE.
  const int reps = 20;
  int node_ok = 0;
  for (int r = 0; r < reps; ++r) {
    Random rng = Random::stream(77, r);
    SimulationSpec spec;
    spec.n = 500;
    spec.Sigma << 1.0, 0.5, 0.5, 1.5;
    spec.sigma2 = 2.0;
    spec.rho = 0.5;
    const Simulation sim = simulate_ame(spec, rng);
    const SrmMoments m = row_col_effects(sim.S);
    CHECK(std::abs(m.sigma2_hat / 2.0 - 1.0) < 0.1);
    CHECK(std::abs(m.rho_hat / 0.5 - 1.0) < 0.1);
    const double n = spec.n;
    const bool aa = std::abs(m.sigma_a2 - 1.0) < 3 * std::sqrt(2.0 / n) * 1.0 + 0.01;
    const bool bb = std::abs(m.sigma_b2 - 1.5) < 3 * std::sqrt(2.0 / n) * 1.5 + 0.01;
    const bool ab = std::abs(m.sigma_ab - 0.5) < 3 * std::sqrt((1.0 * 1.5 + 0.25) / n) + 0.01;
    node_ok += aa && bb && ab;
  }
  CHECK(node_ok >= reps - 2);
}
