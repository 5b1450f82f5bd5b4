#include "ame/commands.hpp"

#include "ame/simulate.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace ame {

namespace {

constexpr const char* kVersion = "1.0.0";

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json vector_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw DataError("ragged matrix in JSON");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

std::vector<std::string> node_labels(int n) {
  const int width = static_cast<int>(std::to_string(n).size());
  std::vector<std::string> labels;
  for (int i = 1; i <= n; ++i) {
    std::string s = std::to_string(i);
    labels.push_back("n" + std::string(width - s.size(), '0') + s);
  }
  return labels;
}

// Relative data paths are tried against the current directory first and then
// against the directory the fit was run from.
std::string resolve(const std::string& path, const fs::path& origin) {
  if (path.empty() || fs::path(path).is_absolute() || fs::exists(path)) return path;
  return (origin / path).string();
}

nlohmann::json state_json(const ChainState& s) {
  return {{"iteration", s.iteration},
          {"beta", vector_json(s.beta)},
          {"Sigma", matrix_json(s.srm.Sigma)},
          {"sigma2", s.srm.sigma2},
          {"rho", s.srm.rho},
          {"a", vector_json(s.srm.a)},
          {"b", vector_json(s.srm.b)},
          {"U", matrix_json(s.mult.U)},
          {"V", matrix_json(s.mult.V)},
          {"Psi", matrix_json(s.mult.Psi)},
          {"Y", matrix_json(s.Y)}};
}

}  // namespace

ModelConfig model_config(const RunConfig& config, int p) {
  ModelConfig m;
  m.rank = config.rank;
  m.prior = PriorSpec::defaults(p, config.rank);
  if (config.q0_scale) m.prior.Q0 = *config.q0_scale * Matrix::Identity(p, p);
  if (config.nu0) m.prior.nu0 = *config.nu0;
  if (config.sigma02) m.prior.sigma02 = *config.sigma02;
  if (config.eta0) m.prior.eta0 = *config.eta0;
  if (config.kappa0) m.prior.kappa0 = *config.kappa0;
  m.prior.rho_grid = config.rho_grid;
  m.prior.validate(p, config.rank);
  m.transform.ordinal_within_row = config.ordinal_within_row;
  m.check_constraints = config.check_constraints;
  return m;
}

PosteriorSamples cmd_fit(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const fs::path out_dir = config.output_dir;
  DirectoryLock lock(out_dir);

  const DataKind kind = data_kind_from_string(config.family);
  const Sociomatrix S = load_sociomatrix(config.data, kind, config.frn_max);
  const DyadicDesign X = load_design(config, S.labels());
  const ModelConfig model = model_config(config, X.p());
  const ChainSettings settings{config.iterations, config.burn_in, config.thin};

  const nlohmann::json cfg = config.to_json(false);
  const std::string hash = config_hash(cfg);
  const std::string comment = provenance_comment(hash, *config.seed);

  PosteriorSamples samples;
  try {
    samples = run_chains(S, X, model, settings, *config.seed, config.chains);
  } catch (const ChainFailure& e) {
    const fs::path snap = out_dir / "failure_state.json";
    nlohmann::json j = state_json(e.state());
    j["chain"] = e.chain();
    j["failed_iteration"] = e.iteration();
    j["config_hash"] = hash;
    write_json(snap, j);
    throw NumericalError(std::string(e.what()) + "; state snapshot written to " + snap.string());
  }

  write_draws(out_dir / "draws.csv", samples, comment);
  write_effect_draws(out_dir / "effects_draws.csv", samples, comment);
  write_summary(out_dir / "summary.csv", regression_summary(samples), comment);
  write_summary(out_dir / "variance_summary.csv", variance_summary(samples), comment);
  std::vector<std::string> files{"draws.csv", "effects_draws.csv", "summary.csv", "variance_summary.csv"};
  if (config.rank > 0) {
    write_factors(out_dir / "factors.csv", samples.uv_mean(), config.rank, S.labels(), comment);
    files.push_back("factors.csv");
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json manifest;
  manifest["config"] = cfg;
  manifest["config_hash"] = hash;
  manifest["seed"] = *config.seed;
  manifest["version"] = kVersion;
  manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION);
  manifest["working_directory"] = fs::current_path().string();
  manifest["wall_time_seconds"] = seconds;
  manifest["n"] = S.n();
  manifest["regressors"] = X.names();
  manifest["stored_draws_per_chain"] = settings.stored();
  manifest["draw_columns"] = draw_columns(X.names(), config.rank);
  manifest["files"] = files;
  write_json(out_dir / "manifest.json", manifest);
  return samples;
}

nlohmann::json SimulateConfig::to_json(bool with_output) const {
  nlohmann::json j{{"n", n},
                   {"family", family},
                   {"rank", rank},
                   {"ordinal_levels", ordinal_levels},
                   {"frn_max", frn_max},
                   {"intercept", intercept},
                   {"dyad_beta", dyad_beta},
                   {"sigma_aa", sigma_aa},
                   {"sigma_ab", sigma_ab},
                   {"sigma_bb", sigma_bb},
                   {"sigma2", sigma2},
                   {"rho", rho},
                   {"psi_scale", psi_scale},
                   {"missing_rate", missing_rate}};
  if (Psi) j["Psi"] = matrix_json(*Psi);
  if (seed) j["seed"] = *seed;
  if (with_output) j["output_dir"] = output_dir;
  return j;
}

SimulateConfig SimulateConfig::from_json(const nlohmann::json& j, SimulateConfig c) {
  try {
    auto take = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    take("n", c.n);
    take("family", c.family);
    take("rank", c.rank);
    take("ordinal_levels", c.ordinal_levels);
    take("frn_max", c.frn_max);
    take("intercept", c.intercept);
    take("dyad_beta", c.dyad_beta);
    take("sigma_aa", c.sigma_aa);
    take("sigma_ab", c.sigma_ab);
    take("sigma_bb", c.sigma_bb);
    take("sigma2", c.sigma2);
    take("rho", c.rho);
    take("psi_scale", c.psi_scale);
    take("missing_rate", c.missing_rate);
    take("output_dir", c.output_dir);
    if (j.contains("Psi")) c.Psi = matrix_from_json(j.at("Psi"));
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad simulation config: ") + e.what());
  }
  return c;
}

Simulation cmd_simulate(const SimulateConfig& config) {
  if (!config.seed) throw DataError("a seed is required");
  const fs::path out_dir = config.output_dir;
  DirectoryLock lock(out_dir);
  Random rng(*config.seed);

  SimulationSpec spec;
  spec.n = config.n;
  spec.kind = data_kind_from_string(config.family);
  spec.rank = config.rank;
  spec.ordinal_levels = config.ordinal_levels;
  spec.frn_max = config.frn_max;
  spec.Sigma << config.sigma_aa, config.sigma_ab, config.sigma_ab, config.sigma_bb;
  spec.sigma2 = config.sigma2;
  spec.rho = config.rho;
  spec.missing_rate = config.missing_rate;
  spec.Psi = config.Psi ? *config.Psi : config.psi_scale * Matrix::Identity(2 * config.rank, 2 * config.rank);
  if (spec.n < 3) throw DataError("simulation needs n >= 3");

  std::vector<Matrix> dyad;
  std::vector<std::string> dyad_names;
  for (std::size_t k = 0; k < config.dyad_beta.size(); ++k) {
    dyad.push_back(rng.normal_matrix(spec.n, spec.n));
    dyad_names.push_back("x" + std::to_string(k + 1));
  }
  std::vector<Matrix> slices{Matrix::Ones(spec.n, spec.n)};
  std::vector<std::string> names{"intercept"};
  slices.insert(slices.end(), dyad.begin(), dyad.end());
  names.insert(names.end(), dyad_names.begin(), dyad_names.end());
  spec.design = DyadicDesign(spec.n, slices, names);
  spec.beta.resize(static_cast<Eigen::Index>(slices.size()));
  spec.beta(0) = config.intercept;
  for (std::size_t k = 0; k < config.dyad_beta.size(); ++k)
    spec.beta(static_cast<Eigen::Index>(k + 1)) = config.dyad_beta[k];

  Simulation sim = simulate_ame(spec, rng);
  const std::vector<std::string> labels = node_labels(spec.n);
  sim.S = Sociomatrix::make(sim.S.values(), sim.S.mask(), sim.S.kind(),
                            spec.kind == DataKind::frn ? spec.frn_max : 0, labels);

  const nlohmann::json cfg = config.to_json(false);
  const std::string hash = config_hash(cfg);
  const std::string comment = provenance_comment(hash, *config.seed);

  // ordinal data are written with their original level codes
  Matrix written = sim.S.values();
  if (spec.kind == DataKind::ordinal)
    written = written.unaryExpr([&](double v) {
      return std::isfinite(v) ? sim.S.levels()[static_cast<std::size_t>(v)] : v;
    });
  write_sociomatrix(out_dir / "sociomatrix.csv", written, sim.S.mask(), labels, comment);
  if (!dyad.empty())
    write_dyadic_covariates(out_dir / "dyad_covariates.csv", dyad, dyad_names, labels, comment);

  nlohmann::json truth;
  truth["regressors"] = names;
  truth["beta"] = vector_json(spec.beta);
  truth["Sigma"] = matrix_json(spec.Sigma);
  truth["sigma2"] = spec.sigma2;
  truth["rho"] = spec.rho;
  truth["rank"] = spec.rank;
  truth["Psi"] = matrix_json(spec.Psi);
  truth["thresholds"] = sim.thresholds;
  truth["labels"] = labels;
  truth["a"] = vector_json(sim.a);
  truth["b"] = vector_json(sim.b);
  truth["U"] = matrix_json(sim.U);
  truth["V"] = matrix_json(sim.V);
  truth["Y"] = matrix_json(sim.Y);
  nlohmann::json manifest{{"config", cfg},      {"config_hash", hash}, {"seed", *config.seed},
                          {"version", kVersion}, {"family", config.family}, {"truth", truth}};
  write_json(out_dir / "manifest.json", manifest);
  return sim;
}

SrmMoments cmd_describe(const std::string& data, DataKind kind, int frn_max,
                        const std::string& output_dir) {
  const Sociomatrix S = load_sociomatrix(data, kind, frn_max);
  const fs::path out_dir = output_dir;
  DirectoryLock lock(out_dir);
  const SrmMoments m = row_col_effects(S);
  const DyadicScatter scatter = dyadic_scatter_data(m);
  {
    std::ofstream out(out_dir / "srm_moments.csv");
    out << std::setprecision(17) << "name,value\n"
        << "mu_hat," << m.mu_hat << "\nsigma_a2," << m.sigma_a2 << "\nsigma_b2," << m.sigma_b2
        << "\nsigma_ab," << m.sigma_ab << "\nsigma2_hat," << m.sigma2_hat << "\nrho_hat," << m.rho_hat
        << '\n';
  }
  {
    std::ofstream out(out_dir / "node_effects.csv");
    out << std::setprecision(17) << "label,a,b\n";
    for (int i = 0; i < S.n(); ++i) out << S.labels()[i] << ',' << m.a_hat(i) << ',' << m.b_hat(i) << '\n';
  }
  {
    std::ofstream out(out_dir / "dyad_scatter.csv");
    out << std::setprecision(17) << "from,to,e_ij,e_ji\n";
    std::size_t k = 0;
    for (int i = 0; i < S.n(); ++i)
      for (int j = i + 1; j < S.n(); ++j) {
        if (!(m.mask(i, j) && m.mask(j, i))) continue;
        const auto& [x, y] = scatter.dyads[k++];
        out << S.labels()[i] << ',' << S.labels()[j] << ',' << x << ',' << y << '\n';
      }
  }
  return m;
}

namespace {

struct LoadedFit {
  RunConfig config;
  Sociomatrix S;
  DyadicDesign X;
  PosteriorSamples samples;
  std::string hash;
};

LoadedFit load_fit(const fs::path& dir) {
  const nlohmann::json manifest = read_json(dir / "manifest.json");
  LoadedFit fit;
  fit.config = RunConfig::from_json(manifest.at("config"));
  fit.hash = manifest.at("config_hash").get<std::string>();
  const fs::path origin = manifest.value("working_directory", std::string("."));
  RunConfig resolved = fit.config;
  resolved.data = resolve(resolved.data, origin);
  resolved.row_covariates = resolve(resolved.row_covariates, origin);
  resolved.col_covariates = resolve(resolved.col_covariates, origin);
  resolved.dyad_covariates = resolve(resolved.dyad_covariates, origin);
  const DataKind kind = data_kind_from_string(resolved.family);
  fit.S = load_sociomatrix(resolved.data, kind, resolved.frn_max);
  fit.X = load_design(resolved, fit.S.labels());
  fit.samples = load_posterior_samples(dir / "draws.csv", dir / "effects_draws.csv", kind,
                                       fit.config.rank, fit.S.n(), fit.X.names());
  return fit;
}

}  // namespace

GofResult cmd_gof(const std::string& fit_dir) {
  const fs::path dir = fit_dir;
  LoadedFit fit = load_fit(dir);
  DirectoryLock lock(dir);
  // a stream index no chain uses
  Random rng = Random::stream(*fit.config.seed, 1000003);
  const GofResult gof = posterior_predictive_gof(fit.samples, fit.S, fit.X, rng);
  const std::string comment = provenance_comment(fit.hash, *fit.config.seed);
  {
    std::ofstream out(dir / "gof_replicates.csv");
    out << comment << '\n' << std::setprecision(17) << "replicate,triadic_stat\n";
    for (std::size_t k = 0; k < gof.replicates.size(); ++k) out << k << ',' << gof.replicates[k] << '\n';
  }
  write_json(dir / "gof.json", {{"statistic", "triadic"},
                                {"observed", gof.observed},
                                {"tail_probability", gof.tail_probability},
                                {"quantile_025", gof.quantile(0.025)},
                                {"quantile_975", gof.quantile(0.975)},
                                {"inside_central_95", gof.inside_central(0.95)},
                                {"replicates", gof.replicates.size()},
                                {"config_hash", fit.hash},
                                {"seed", *fit.config.seed}});
  return gof;
}

void cmd_summary(const std::string& fit_dir, std::ostream& out) {
  const fs::path dir = fit_dir;
  const nlohmann::json manifest = read_json(dir / "manifest.json");
  const RunConfig config = RunConfig::from_json(manifest.at("config"));
  const auto regressors = manifest.at("regressors").get<std::vector<std::string>>();
  const PosteriorSamples samples =
      load_posterior_samples(dir / "draws.csv", dir / "effects_draws.csv",
                             data_kind_from_string(config.family), config.rank,
                             manifest.at("n").get<int>(), regressors);
  auto print = [&](const std::vector<SummaryRow>& rows) {
    out << std::left << std::setw(20) << "name" << std::right << std::setw(14) << "mean" << std::setw(14)
        << "sd" << std::setw(14) << "t_ratio" << '\n';
    for (const auto& r : rows)
      out << std::left << std::setw(20) << r.name << std::right << std::fixed << std::setprecision(4)
          << std::setw(14) << r.mean << std::setw(14) << r.sd << std::setw(14) << r.t_ratio << '\n';
    out.unsetf(std::ios::fixed);
  };
  out << "draws: " << samples.draws.size() << "  family: " << config.family << "  rank: " << config.rank
      << '\n';
  if (!regressors.empty()) print(regression_summary(samples));
  out << '\n';
  print(variance_summary(samples));
}

}  // namespace ame
