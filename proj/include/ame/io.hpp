#pragma once

#include "ame/core.hpp"
#include "ame/sampler.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ame {

namespace fs = std::filesystem;

/// Everything needed to reproduce a fit.
struct RunConfig {
  std::string data;
  std::string family = "gaussian";
  int frn_max = 0;
  int rank = 0;
  bool intercept = true;
  std::string row_covariates;
  std::string col_covariates;
  std::string dyad_covariates;
  /// Regressor names to keep; empty keeps all.
  std::vector<std::string> regressors;
  // prior overrides
  std::optional<double> q0_scale;
  std::optional<double> nu0, sigma02, eta0, kappa0;
  int rho_grid = 400;
  bool ordinal_within_row = false;
  bool check_constraints = false;
  int chains = 2;
  long iterations = 10000;
  long burn_in = 1000;
  long thin = 10;
  std::optional<std::uint64_t> seed;
  std::string output_dir = "ame_out";

  void validate() const;
  /// The output directory is excluded so the same run hashes the same anywhere.
  nlohmann::json to_json(bool with_output = true) const;
  /// Fields present in `j` override those of `base`.
  static RunConfig from_json(const nlohmann::json& j, RunConfig base);
  static RunConfig from_json(const nlohmann::json& j) { return from_json(j, RunConfig()); }
};

/// 16 hex digits of the FNV-1a hash of the canonical config JSON.
std::string config_hash(const nlohmann::json& config);

/// Sociomatrix CSV: first row and first column hold node labels, cells are
/// numbers or NA. The diagonal is forced missing.
Sociomatrix load_sociomatrix(const fs::path& path, DataKind kind, int frn_max = 0);
void write_sociomatrix(const fs::path& path, const Matrix& values, const Mask& mask,
                       const std::vector<std::string>& labels, const std::string& comment = {});

/// Nodal covariates keyed by label: header `label,x1,x2,...`, one row per node.
Matrix load_nodal_covariates(const fs::path& path, const std::vector<std::string>& labels,
                             std::vector<std::string>& names);

/// Dyadic covariates as an edge list `from,to,x1,...` covering every ordered
/// pair of distinct nodes; diagonal rows are optional and default to 0.
std::vector<Matrix> load_dyadic_covariates(const fs::path& path,
                                           const std::vector<std::string>& labels,
                                           std::vector<std::string>& names);
void write_dyadic_covariates(const fs::path& path, const std::vector<Matrix>& slices,
                             const std::vector<std::string>& names,
                             const std::vector<std::string>& labels, const std::string& comment = {});

/// Design described by a run config, restricted to the selected regressors.
DyadicDesign load_design(const RunConfig& config, const std::vector<std::string>& labels);

/// Draw file columns, in order:
///   chain, iteration, beta_<name>..., Sigma_aa, Sigma_ab, Sigma_bb, sigma2,
///   rho, tr_psi_uv, Psi_<k>_<l> for k <= l.
std::vector<std::string> draw_columns(const std::vector<std::string>& regressors, int rank);
void write_draws(const fs::path& path, const PosteriorSamples& samples, const std::string& comment);
/// Per-node effects of every draw: chain, iteration, node, a, b, u1..ur, v1..vr.
void write_effect_draws(const fs::path& path, const PosteriorSamples& samples,
                        const std::string& comment);
/// Reads the two draw files back; checks the header against the expected schema.
PosteriorSamples load_posterior_samples(const fs::path& draws_path, const fs::path& effects_path,
                                        DataKind kind, int rank, int n,
                                        const std::vector<std::string>& regressors);

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double t_ratio = 0.0;
};
/// Posterior mean, SD and mean/SD per regressor.
std::vector<SummaryRow> regression_summary(const PosteriorSamples& samples);
/// Posterior mean and SD of the variance parameters.
std::vector<SummaryRow> variance_summary(const PosteriorSamples& samples);
void write_summary(const fs::path& path, const std::vector<SummaryRow>& rows,
                   const std::string& comment);

/// Per-node factors from the SVD of the posterior-mean UV^T, split as
/// U = L sqrt(D), V = R sqrt(D).
void write_factors(const fs::path& path, const Matrix& uv_mean, int rank,
                   const std::vector<std::string>& labels, const std::string& comment);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

/// Exclusive ownership of an output directory for the lifetime of the object.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
};

/// `# ame config_hash=<hash> seed=<seed>` line placed at the top of every output file.
std::string provenance_comment(const std::string& hash, std::uint64_t seed);

}  // namespace ame
