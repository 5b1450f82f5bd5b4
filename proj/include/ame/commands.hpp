#pragma once

#include "ame/gof.hpp"
#include "ame/io.hpp"
#include "ame/sampler.hpp"
#include "ame/simulate.hpp"
#include "ame/srm_descriptive.hpp"

#include <iosfwd>

namespace ame {

/// Model settings implied by a run config (defaults plus overrides).
ModelConfig model_config(const RunConfig& config, int p);

/// Runs the chains and writes draws.csv, effects_draws.csv, summary.csv,
/// variance_summary.csv, factors.csv (rank > 0) and manifest.json.
PosteriorSamples cmd_fit(const RunConfig& config);

struct SimulateConfig {
  int n = 50;
  std::string family = "gaussian";
  int rank = 0;
  int ordinal_levels = 4;
  int frn_max = 5;
  double intercept = 0.0;
  /// One standard-normal dyadic covariate per coefficient.
  std::vector<double> dyad_beta;
  double sigma_aa = 1.0, sigma_ab = 0.0, sigma_bb = 1.0;
  double sigma2 = 1.0;
  double rho = 0.0;
  /// Psi = psi_scale * I unless given in full.
  double psi_scale = 1.0;
  std::optional<Matrix> Psi;
  double missing_rate = 0.0;
  std::optional<std::uint64_t> seed;
  std::string output_dir = "ame_sim";

  nlohmann::json to_json(bool with_output = true) const;
  static SimulateConfig from_json(const nlohmann::json& j, SimulateConfig base);
  static SimulateConfig from_json(const nlohmann::json& j) { return from_json(j, SimulateConfig()); }
};

/// Writes sociomatrix.csv, dyad_covariates.csv (if any) and manifest.json
/// holding every true parameter and latent matrix.
Simulation cmd_simulate(const SimulateConfig& config);

/// Writes srm_moments.csv, node_effects.csv and dyad_scatter.csv.
SrmMoments cmd_describe(const std::string& data, DataKind kind, int frn_max,
                        const std::string& output_dir);

/// Posterior predictive triadic check for a finished fit; writes gof.json and
/// gof_replicates.csv into the fit directory.
GofResult cmd_gof(const std::string& fit_dir);

/// Prints the regression and variance summaries of a finished fit.
void cmd_summary(const std::string& fit_dir, std::ostream& out);

}  // namespace ame
