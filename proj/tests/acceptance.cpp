// Acceptance checks. Prints one PASS/FAIL line per criterion and exits with
// the number of failures.

#include "ame/commands.hpp"
#include "ame/gof.hpp"
#include "ame/latent_geometry.hpp"
#include "ame/sampler.hpp"
#include "ame/simulate.hpp"
#include "ame/srrm.hpp"
#include "ame/transforms.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace ame;

namespace {

const double inf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

int failures = 0;

void criterion(int id, const std::string& name, double limit_seconds,
               const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = limit_seconds <= 0 || secs < limit_seconds;
  const bool pass = out.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s %2d %s: %s; %.1f s", pass ? "PASS" : "FAIL", id, name.c_str(), out.detail.c_str(),
              secs);
  if (limit_seconds > 0) std::printf(" (limit %.0f s)", limit_seconds);
  std::printf("\n");
  std::fflush(stdout);
}

void note(const std::string& text) {
  std::printf("     note: %s\n", text.c_str());
  std::fflush(stdout);
}

// mean and standard error of a product sample
struct Moment {
  double sum = 0, sq = 0;
  long m = 0;
  void add(double x) { sum += x, sq += x * x, ++m; }
  double mean() const { return sum / m; }
  double se() const { return std::sqrt((sq / m - mean() * mean()) / m); }
  double z(double target) const { return std::abs(mean() - target) / se(); }
};

double quantile(std::vector<double> x, double q) {
  std::sort(x.begin(), x.end());
  const double pos = q * (x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - lo) * (x[hi] - x[lo]);
}

double sup_cdf_distance(std::vector<double> x, double mean, double sd, double lo, double hi) {
  std::sort(x.begin(), x.end());
  double d = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double F = truncated_normal_cdf(x[k], mean, sd, lo, hi);
    d = std::max({d, std::abs(F - k / m), std::abs(F - (k + 1) / m)});
  }
  return d;
}

// ---------------------------------------------------------------------------

Outcome additive_closed_form() {
  const double tol = 1e-10;
  Random rng(101);
  double worst = 0;
  for (int n = 2; n <= 6; ++n)
    for (int rep = 0; rep < 20; ++rep) {
      const Matrix2 St = oracle::random_spd(2, rng, 0.05);
      const Matrix R = rng.normal_matrix(n, n);
      const auto fc = additive_effects_suffstats(R, St);
      const auto dense = oracle::dense_additive_posterior(R, St);
      worst = std::max(worst, (oracle::vec(fc.mean()) - dense.mean).cwiseAbs().maxCoeff());
      worst = std::max(worst, (fc.dense_covariance() - dense.cov).cwiseAbs().maxCoeff());
    }
  return {worst <= tol, fmt("max entrywise deviation %.2e over 100 cases (tol %.0e)", worst, tol)};
}

Outcome beta_marginalization() {
  const double tol = 1e-8;
  Random rng(102);
  double worst = 0;
  for (int n = 2; n <= 5; ++n)
    for (int p = 1; p <= 2; ++p) {
      std::vector<Matrix> slices{Matrix::Ones(n, n)};
      if (p == 2) slices.push_back(rng.normal_matrix(n, n));
      std::vector<std::string> names{"intercept", "x"};
      names.resize(p);
      const DyadicDesign X(n, slices, names);
      const Matrix2 Sigma = oracle::random_spd(2, rng, 0.2);
      const double s2 = 0.5 + rng.uniform();
      const double rho = rng.uniform(-0.8, 0.8);
      const Matrix Y = rng.normal_matrix(n, n);
      const Vector beta0 = rng.normal_vector(p);
      const Matrix Q0 = oracle::random_spd(p, rng, 0.3);

      const auto k = decorrelation_constants(s2, rho);
      const Matrix2 root = k.inv_sqrt_cov();
      Matrix2 G, H;
      additive_gh(root * Sigma * root, n, G, H);
      const auto bc = beta_full_conditional(
          beta_suffstats(decorrelate(Y, k), transform_design(X, k), G, H), beta0, Q0);

      // 27 grid points; with p = 1 only the first coordinate is used
      std::vector<double> diffs;
      for (double t0 : {-1.5, 0.2, 1.8})
        for (double t1 : {-2.0, -1.0, -0.4, 0.0, 0.3, 0.9, 1.4, 2.2, 3.0}) {
          Vector beta(p);
          beta(0) = p == 1 ? t0 + 0.1 * t1 : t0;
          if (p > 1) beta(1) = t1;
          diffs.push_back(oracle::dense_beta_log_posterior(Y, X, beta, Sigma, s2, rho, beta0, Q0) -
                          bc.log_density(beta));
        }
      const auto [lo, hi] = std::minmax_element(diffs.begin(), diffs.end());
      worst = std::max(worst, *hi - *lo);
    }
  return {worst <= tol,
          fmt("max spread of (dense - closed form) over 27-point grids, n = 2..5, p = 1..2: %.2e "
              "(tol %.0e)",
              worst, tol)};
}

Outcome decorrelation() {
  const double tol = 1e-12;
  Random rng(103);
  double worst = 0;
  for (double rho : {-0.95, -0.5, 0.0, 0.4, 0.9}) {
    const auto k = decorrelation_constants(0.3 + 3 * rng.uniform(), rho);
    const Matrix Y = rng.normal_matrix(20, 20);
    worst = std::max(worst, (correlate(decorrelate(Y, k), k) - Y).cwiseAbs().maxCoeff());
  }
  const int n = 448;  // 100128 dyads
  const double s2 = 1.6, rho = 0.7;
  const Matrix Z = decorrelate(simulate_srm_noise(n, s2, rho, rng), decorrelation_constants(s2, rho));
  Moment v1, v2, c12;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      v1.add(Z(i, j) * Z(i, j));
      v2.add(Z(j, i) * Z(j, i));
      c12.add(Z(i, j) * Z(j, i));
    }
  const double zmax = std::max({v1.z(1.0), v2.z(1.0), c12.z(0.0)});
  return {worst <= tol && zmax < 3.0,
          fmt("round trip %.2e (tol %.0e); %ld dyads: var %.4f, %.4f, cov %.4f, max |z| %.2f (tol 3)",
              worst, tol, v1.m, v1.mean(), v2.mean(), c12.mean(), zmax)};
}

Outcome srm_covariance_table() {
  Matrix2 Sigma;
  Sigma << 1.0, 0.3, 0.3, 0.7;
  const double s2 = 1.2, rho = 0.4;
  Moment var, row, col, rowcol, recip, disjoint;
  Random rng(104);
  for (int rep = 0; rep < 100000; ++rep) {
    SimulationSpec spec;
    spec.n = 4;
    spec.Sigma = Sigma;
    spec.sigma2 = s2;
    spec.rho = rho;
    const Matrix Y = simulate_ame(spec, rng).Y;
    var.add(Y(0, 1) * Y(0, 1));
    row.add(Y(0, 1) * Y(0, 2));
    col.add(Y(0, 1) * Y(2, 1));
    rowcol.add(Y(0, 1) * Y(1, 2));
    recip.add(Y(0, 1) * Y(1, 0));
    disjoint.add(Y(0, 1) * Y(2, 3));
  }
  struct Row {
    const char* name;
    PairType type;
    const Moment* m;
  };
  bool pass = true;
  std::string detail;
  for (const Row& r : {Row{"variance", PairType::variance, &var}, Row{"same_row", PairType::same_row, &row},
                       Row{"same_column", PairType::same_column, &col},
                       Row{"row_column", PairType::row_column, &rowcol},
                       Row{"reciprocal", PairType::reciprocal, &recip},
                       Row{"disjoint", PairType::disjoint, &disjoint}}) {
    const double target = srm_covariance(r.type, Sigma, s2, rho);
    const double z = r.m->z(target);
    if (z >= 3.0) pass = false;
    detail += fmt("%s%s %.3f vs %.3f (z %.1f)", detail.empty() ? "" : ", ", r.name, r.m->mean(), target, z);
  }
  note(fmt("relation variance recomputed without the 2 sigma_ab term: %.3f vs %.3f (z %.1f)",
           var.mean(), Sigma(0, 0) + Sigma(1, 1) + s2, var.z(Sigma(0, 0) + Sigma(1, 1) + s2)));
  return {pass, "100000 replicates: " + detail};
}

Outcome third_moment() {
  Random rng(105);
  bool pass = true, corrected_pass = true;
  std::string detail, corrected;
  for (int r : {1, 1, 2, 2, 3}) {
    const Matrix Psi = oracle::random_spd(2 * r, rng, 0.2);
    const Matrix Psi_uv = Psi.topRightCorner(r, r);
    const Matrix root = Psi.llt().matrixL();
    Moment m;
    for (long t = 0; t < 1000000; ++t) {
      const Matrix uv = root * rng.normal_matrix(2 * r, 3);  // columns are nodes i, j, k
      auto gamma = [&](int a, int b) { return uv.col(a).head(r).dot(uv.col(b).tail(r)); };
      m.add(gamma(0, 1) * gamma(1, 2) * gamma(2, 0));
    }
    const double stated = std::pow(Psi_uv.trace(), 3);
    const double exact = (Psi_uv * Psi_uv * Psi_uv).trace();
    if (m.z(stated) >= 3.0) pass = false;
    if (m.z(exact) >= 3.0) corrected_pass = false;
    detail += fmt("%sr=%d MC %.4f vs tr(Psi_uv)^3 %.4f (z %.1f)", detail.empty() ? "" : ", ", r, m.mean(),
                  stated, m.z(stated));
    corrected += fmt("%sr=%d %.4f (z %.1f)", corrected.empty() ? "" : ", ", r, exact, m.z(exact));
  }
  note("same draws against tr(Psi_uv^3): " + corrected + (corrected_pass ? "; all within 3 SE" : "; NOT all within 3 SE"));
  return {pass, "10^6 triads per Psi: " + detail};
}

Outcome srrm_recovery() {
  const int n = 100, reps = 100;
  const ChainSettings settings{1500, 300, 3};
  Matrix2 Sigma;
  Sigma << 1.0, 0.4, 0.4, 0.8;
  const double s2 = 1.0, rho = 0.5;
  Vector beta(2);
  beta << 1.0, -0.5;
  const char* names[] = {"beta_intercept", "beta_x", "Sigma_aa", "Sigma_ab", "Sigma_bb", "sigma2", "rho"};
  const double truth[] = {beta(0), beta(1), Sigma(0, 0), Sigma(0, 1), Sigma(1, 1), s2, rho};
  int covered[7] = {};
  for (int rep = 0; rep < reps; ++rep) {
    Random rng = Random::stream(106, rep);
    const DyadicDesign X(n, {Matrix::Ones(n, n), rng.normal_matrix(n, n)}, {"intercept", "x"});
    SimulationSpec spec;
    spec.n = n;
    spec.design = X;
    spec.beta = beta;
    spec.Sigma = Sigma;
    spec.sigma2 = s2;
    spec.rho = rho;
    const Simulation sim = simulate_ame(spec, rng);
    ModelConfig cfg;
    cfg.prior = PriorSpec::defaults(2, 0);
    const PosteriorSamples ps = run_chains(sim.S, X, cfg, settings, 5000 + rep, 1);
    std::vector<std::vector<double>> trace(7);
    for (const Draw& d : ps.draws) {
      const double v[] = {d.beta(0), d.beta(1), d.Sigma(0, 0), d.Sigma(0, 1), d.Sigma(1, 1), d.sigma2, d.rho};
      for (int k = 0; k < 7; ++k) trace[k].push_back(v[k]);
    }
    for (int k = 0; k < 7; ++k)
      if (quantile(trace[k], 0.025) <= truth[k] && truth[k] <= quantile(trace[k], 0.975)) ++covered[k];
  }
  bool pass = true;
  std::string detail;
  for (int k = 0; k < 7; ++k) {
    if (covered[k] < 90) pass = false;
    detail += fmt("%s%s %d", k ? ", " : "", names[k], covered[k]);
  }
  return {pass, fmt("95%% intervals covering the truth in %d replicates (need >= 90): ", reps) + detail};
}

Outcome probit_reduction() {
  const int n = 300;
  Random rng(107);
  const DyadicDesign X(n, {Matrix::Ones(n, n), rng.normal_matrix(n, n)}, {"intercept", "x"});
  SimulationSpec spec;
  spec.n = n;
  spec.design = X;
  spec.beta = Vector(2);
  spec.beta << -0.5, 0.8;
  spec.Sigma = 1e-4 * Matrix2::Identity();
  spec.kind = DataKind::binary;
  const Simulation sim = simulate_ame(spec, rng);
  ModelConfig cfg;
  cfg.prior = PriorSpec::defaults(2, 0);
  const PosteriorSamples ps = run_chains(sim.S, X, cfg, ChainSettings{1000, 200, 2}, 7, 1);
  bool pass = true;
  std::string detail;
  for (int k = 0; k < 2; ++k) {
    const auto ms = oracle::mean_se(ps.beta_trace(k));
    const double sd = ms.se * std::sqrt(double(ps.draws.size()));
    const double z = std::abs(ms.mean - spec.beta(k)) / sd;
    if (z >= 3.0) pass = false;
    detail += fmt("%sbeta_%d %.3f (truth %.2f, sd %.3f, %.2f sd)", k ? ", " : "", k, ms.mean, spec.beta(k), sd, z);
  }
  return {pass, detail};
}

Outcome truncated_normal_sampler() {
  const double tol = 0.01;
  Random rng(108);
  struct Case {
    const char* name;
    double lo, hi;
  };
  bool pass = true;
  std::string detail;
  std::vector<double> onesided;
  for (const Case c : {Case{"(-inf,0)", -inf, 0.0}, Case{"(-0.7,1.3)", -0.7, 1.3}, Case{"(5,inf)", 5.0, inf}}) {
    std::vector<double> x;
    for (int k = 0; k < 100000; ++k) x.push_back(truncated_normal(0.0, 1.0, c.lo, c.hi, rng));
    const double d = sup_cdf_distance(x, 0.0, 1.0, c.lo, c.hi);
    if (!(d < tol)) pass = false;
    if (c.lo == -inf) onesided = x;
    detail += fmt("%s sup-distance %.4f, ", c.name, d);
  }
  const auto ms = oracle::mean_se(onesided);
  const double z = std::abs(ms.mean + std::sqrt(2.0 / M_PI)) / ms.se;
  if (z >= 3.0) pass = false;
  return {pass, detail + fmt("one-sided mean %.4f vs %.4f (z %.2f); tol %.2f, 3 SE", ms.mean,
                             -std::sqrt(2.0 / M_PI), z, tol)};
}

Outcome constraint_invariant() {
  bool pass = true;
  std::string detail;
  const int n = 30;
  for (DataKind kind : {DataKind::binary, DataKind::ordinal, DataKind::frn}) {
    Random rng(109);
    SimulationSpec spec;
    spec.n = n;
    spec.kind = kind;
    spec.frn_max = 4;
    spec.rho = 0.4;
    spec.rank = 1;
    spec.Psi = Matrix::Identity(2, 2);
    spec.missing_rate = 0.05;
    const Simulation sim = simulate_ame(spec, rng);
    const DyadicDesign X(n, {Matrix::Ones(n, n)}, {"intercept"});
    ModelConfig cfg;
    cfg.rank = 1;
    cfg.prior = PriorSpec::defaults(1, 1);
    cfg.check_constraints = true;
    ChainState st = initialize_chain(sim.S, X, cfg);
    long violations = count_constraint_violations(sim.S, st.Y);
    for (int t = 0; t < 1000; ++t) {
      gibbs_step(st, sim.S, X, cfg, rng);
      violations += count_constraint_violations(sim.S, st.Y);
    }
    if (violations != 0) pass = false;
    detail += fmt("%s%s %ld", detail.empty() ? "" : ", ", to_string(kind).c_str(), violations);
  }
  return {pass, "violations over 1000 sweeps: " + detail};
}

Outcome triadic_check() {
  const int n = 50, reps = 10;
  const ChainSettings settings{3000, 500, 5};
  int srrm_outside = 0, ame_inside = 0, both = 0;
  std::string detail;
  for (int rep = 0; rep < reps; ++rep) {
    Random rng = Random::stream(110, rep);
    Matrix Psi = Matrix::Identity(4, 4);
    Psi.topRightCorner(2, 2) = 0.8 * Matrix::Identity(2, 2);
    Psi.bottomLeftCorner(2, 2) = 0.8 * Matrix::Identity(2, 2);
    const DyadicDesign X(n, {Matrix::Ones(n, n)}, {"intercept"});
    SimulationSpec spec;
    spec.n = n;
    spec.design = X;
    spec.beta = Vector::Zero(1);
    spec.Sigma = 0.5 * Matrix2::Identity();
    spec.rank = 2;
    spec.Psi = Psi;
    const Simulation sim = simulate_ame(spec, rng);
    bool ok[2];
    double p[2];
    for (int r : {0, 2}) {
      ModelConfig cfg;
      cfg.rank = r;
      cfg.prior = PriorSpec::defaults(1, r);
      const PosteriorSamples ps = run_chains(sim.S, X, cfg, settings, 9000 + rep, 1);
      Random gof_rng = Random::stream(111, rep);
      const GofResult g = posterior_predictive_gof(ps, sim.S, X, gof_rng);
      ok[r / 2] = r == 0 ? !g.inside_central(0.95) : g.inside_central(0.95);
      p[r / 2] = g.tail_probability;
    }
    srrm_outside += ok[0];
    ame_inside += ok[1];
    both += ok[0] && ok[1];
    detail += fmt("%s%.3f/%.3f", rep ? " " : "", p[0], p[1]);
  }
  return {both >= 8, fmt("SRRM excludes in %d, AME(r=2) includes in %d, both in %d of %d (need >= 8); "
                         "tail probabilities SRRM/AME: ",
                         srrm_outside, ame_inside, both, reps) +
                         detail};
}

Outcome result_one() {
  const double tol = 1e-9;
  Random rng(112);
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int r = 1 + rep % 5;
    const int n = r + static_cast<int>(rng.uniform() * (41 - r));
    Matrix T = rng.normal_matrix(r, r);
    T = (T + T.transpose()).eval();
    std::vector<int> g(n);
    for (int i = 0; i < n; ++i) g[i] = i < r ? i : static_cast<int>(rng.uniform() * r);
    const Matrix S = blockmodel_matrix(g, T);
    worst = std::max(worst, eigenmodel_embed(S, r).reconstruction_error / S.norm());
  }
  return {worst <= tol, fmt("max relative Frobenius error %.2e over 100 matrices (tol %.0e)", worst, tol)};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("ame_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  Random rng(113);
  SimulationSpec spec;
  spec.n = 20;
  spec.rank = 1;
  spec.Psi = Matrix::Identity(2, 2);
  spec.kind = DataKind::ordinal;
  const Simulation sim = simulate_ame(spec, rng);
  write_sociomatrix(dir / "data.csv", sim.S.values(), sim.S.mask(), sim.S.labels());
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  RunConfig c;
  c.data = (dir / "data.csv").string();
  c.family = "ordinal";
  c.rank = 1;
  c.iterations = 300;
  c.burn_in = 50;
  c.thin = 5;
  c.seed = 4242;
  c.output_dir = (dir / "a").string();
  cmd_fit(c);
  c.output_dir = (dir / "b").string();
  cmd_fit(c);
  const bool same = slurp(dir / "a" / "draws.csv") == slurp(dir / "b" / "draws.csv") &&
                    slurp(dir / "a" / "effects_draws.csv") == slurp(dir / "b" / "effects_draws.csv");
  const auto bytes = fs::file_size(dir / "a" / "draws.csv");
  fs::remove_all(dir);
  return {same, fmt("two runs of the same config and seed: draw files %s (%ju bytes)",
                    same ? "identical" : "DIFFER", static_cast<std::uintmax_t>(bytes))};
}

}  // namespace

int main() {
  criterion(1, "additive-effects closed form vs dense oracle", 10, additive_closed_form);
  criterion(2, "marginalized beta conditional vs dense marginal likelihood", 30, beta_marginalization);
  criterion(3, "decorrelation round trip and identity covariance", 10, decorrelation);
  criterion(4, "SRM covariance table vs Monte Carlo", 60, srm_covariance_table);
  criterion(5, "third-moment identity tr(Psi_uv)^3", 60, third_moment);
  criterion(6, "Gaussian SRRM interval coverage, n = 100", 1800, srrm_recovery);
  criterion(7, "probit reduction, n = 300", 300, probit_reduction);
  criterion(8, "truncated normal sampler", 30, truncated_normal_sampler);
  criterion(9, "latent Y stays in C(S) every sweep", 0, constraint_invariant);
  criterion(10, "triadic predictive check, SRRM vs AME(r=2)", 1200, triadic_check);
  criterion(11, "block matrices have exact rank-r eigenmodels", 10, result_one);
  criterion(12, "bit-identical draws for identical config and seed", 0, determinism);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures;
}
