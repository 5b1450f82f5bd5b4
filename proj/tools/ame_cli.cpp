// Command-line front end: fit, simulate, describe, gof, summary.
#include "ame/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

// Flags first, then any JSON config file on top.
template <class Config>
Config with_config_file(const Config& from_flags, const std::string& path) {
  if (path.empty()) return from_flags;
  return Config::from_json(ame::read_json(path), from_flags);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian additive and multiplicative effects models for network data"};
  app.require_subcommand(1);

  ame::RunConfig fit;
  std::string fit_config_file;
  std::uint64_t fit_seed = 0;
  double q0_scale = 0.0;
  auto* fit_cmd = app.add_subcommand("fit", "Run the Gibbs sampler on a sociomatrix");
  fit_cmd->add_option("--data", fit.data, "Sociomatrix CSV");
  fit_cmd->add_option("--family", fit.family, "gaussian, binary, ordinal or frn")->capture_default_str();
  fit_cmd->add_option("--frn-max", fit.frn_max, "Maximum number of nominations (frn)");
  fit_cmd->add_option("--rank", fit.rank, "Dimension of the multiplicative effects")->capture_default_str();
  fit_cmd->add_option("--row-covariates", fit.row_covariates, "Nodal covariates for senders");
  fit_cmd->add_option("--col-covariates", fit.col_covariates, "Nodal covariates for receivers");
  fit_cmd->add_option("--dyad-covariates", fit.dyad_covariates, "Dyadic covariate edge list");
  fit_cmd->add_option("--regressors", fit.regressors, "Regressor names to keep");
  fit_cmd->add_flag("!--no-intercept", fit.intercept, "Drop the intercept");
  fit_cmd->add_option("--q0-scale", q0_scale, "Prior precision of each regression coefficient");
  fit_cmd->add_option("--rho-grid", fit.rho_grid, "Grid resolution for rho")->capture_default_str();
  fit_cmd->add_flag("--ordinal-within-row", fit.ordinal_within_row,
                    "Compare ordinal levels within rows only");
  fit_cmd->add_flag("--check-constraints", fit.check_constraints,
                    "Verify the latent constraints after every sweep");
  fit_cmd->add_option("--chains", fit.chains)->capture_default_str();
  fit_cmd->add_option("--iterations", fit.iterations)->capture_default_str();
  fit_cmd->add_option("--burn-in", fit.burn_in)->capture_default_str();
  fit_cmd->add_option("--thin", fit.thin)->capture_default_str();
  auto* fit_seed_opt = fit_cmd->add_option("--seed", fit_seed, "Master random seed");
  fit_cmd->add_option("--out", fit.output_dir, "Output directory")->capture_default_str();
  fit_cmd->add_option("--config", fit_config_file, "JSON run config; overrides flags");

  ame::SimulateConfig sim;
  std::string sim_config_file;
  std::uint64_t sim_seed = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate data from the model");
  sim_cmd->add_option("--n", sim.n)->capture_default_str();
  sim_cmd->add_option("--family", sim.family)->capture_default_str();
  sim_cmd->add_option("--rank", sim.rank)->capture_default_str();
  sim_cmd->add_option("--levels", sim.ordinal_levels, "Ordinal levels")->capture_default_str();
  sim_cmd->add_option("--frn-max", sim.frn_max)->capture_default_str();
  sim_cmd->add_option("--intercept", sim.intercept)->capture_default_str();
  sim_cmd->add_option("--dyad-beta", sim.dyad_beta, "Coefficients of simulated dyadic covariates");
  sim_cmd->add_option("--sigma-aa", sim.sigma_aa)->capture_default_str();
  sim_cmd->add_option("--sigma-ab", sim.sigma_ab)->capture_default_str();
  sim_cmd->add_option("--sigma-bb", sim.sigma_bb)->capture_default_str();
  sim_cmd->add_option("--sigma2", sim.sigma2)->capture_default_str();
  sim_cmd->add_option("--rho", sim.rho)->capture_default_str();
  sim_cmd->add_option("--psi-scale", sim.psi_scale)->capture_default_str();
  sim_cmd->add_option("--missing-rate", sim.missing_rate)->capture_default_str();
  auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "Random seed");
  sim_cmd->add_option("--out", sim.output_dir)->capture_default_str();
  sim_cmd->add_option("--config", sim_config_file, "JSON simulation config; overrides flags");

  std::string describe_data, describe_family = "gaussian", describe_out = "ame_describe";
  int describe_frn_max = 0;
  auto* describe_cmd = app.add_subcommand("describe", "Row/column effects and dyadic scatter data");
  describe_cmd->add_option("--data", describe_data)->required();
  describe_cmd->add_option("--family", describe_family)->capture_default_str();
  describe_cmd->add_option("--frn-max", describe_frn_max);
  describe_cmd->add_option("--out", describe_out)->capture_default_str();

  std::string gof_dir;
  auto* gof_cmd = app.add_subcommand("gof", "Posterior predictive triadic check of a fit");
  gof_cmd->add_option("fit_dir", gof_dir)->required();

  std::string summary_dir;
  auto* summary_cmd = app.add_subcommand("summary", "Print posterior summaries of a fit");
  summary_cmd->add_option("fit_dir", summary_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) {
      if (*fit_seed_opt) fit.seed = fit_seed;
      if (q0_scale > 0.0) fit.q0_scale = q0_scale;
      const ame::RunConfig config = with_config_file(fit, fit_config_file);
      if (!config.seed) throw ame::DataError("fit requires --seed (or \"seed\" in the config file)");
      const ame::PosteriorSamples samples = ame::cmd_fit(config);
      std::cout << "stored " << samples.draws.size() << " draws in " << config.output_dir << '\n';
    } else if (*sim_cmd) {
      if (*sim_seed_opt) sim.seed = sim_seed;
      const ame::SimulateConfig config = with_config_file(sim, sim_config_file);
      if (!config.seed) throw ame::DataError("simulate requires --seed (or \"seed\" in the config file)");
      ame::cmd_simulate(config);
      std::cout << "wrote " << config.output_dir << '\n';
    } else if (*describe_cmd) {
      const ame::SrmMoments m = ame::cmd_describe(
          describe_data, ame::data_kind_from_string(describe_family), describe_frn_max, describe_out);
      std::cout << "sigma_a2=" << m.sigma_a2 << " sigma_b2=" << m.sigma_b2 << " sigma_ab=" << m.sigma_ab
                << " sigma2=" << m.sigma2_hat << " rho=" << m.rho_hat << '\n';
    } else if (*gof_cmd) {
      const ame::GofResult g = ame::cmd_gof(gof_dir);
      std::cout << "observed=" << g.observed << " tail_probability=" << g.tail_probability << '\n';
    } else if (*summary_cmd) {
      ame::cmd_summary(summary_dir, std::cout);
    }
  } catch (const ame::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ame::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
