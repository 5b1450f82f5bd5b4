#include "ame/sampler.hpp"

#include "ame/srm_descriptive.hpp"
#include "ame/srrm.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>

namespace ame {

void ChainSettings::validate() const {
  if (burn_in < 0) throw DataError("burn-in must be non-negative");
  if (iterations <= burn_in) throw DataError("iterations must exceed burn-in");
  if (thin < 1) throw DataError("thinning must be at least 1");
}

Matrix PosteriorSamples::uv_mean() const {
  if (uv_count == 0) return uv_sum;
  return uv_sum / static_cast<double>(uv_count);
}

std::vector<double> PosteriorSamples::beta_trace(int k) const {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const Draw& d : draws) out.push_back(d.beta(k));
  return out;
}

ChainState initialize_chain(const Sociomatrix& S, const DyadicDesign& X, const ModelConfig& config) {
  const int n = S.n();
  const int r = config.rank;
  const bool gaussian = S.kind() == DataKind::continuous;
  ChainState state;
  state.Y = initial_latent(S);

  const AdditiveFit fit = additive_least_squares(state.Y, S.mask(), X);
  state.beta = fit.beta;
  state.srm.a = fit.a;
  state.srm.b = fit.b;
  // the least-squares split of a constant between a and b is arbitrary; centre b
  const double shift = state.srm.b.mean();
  state.srm.b.array() -= shift;
  state.srm.a.array() += shift;

  Matrix ab(n, 2);
  ab << state.srm.a, state.srm.b;
  const Matrix centred = ab.rowwise() - ab.colwise().mean();
  state.srm.Sigma = centred.transpose() * centred / static_cast<double>(n - 1) +
                    0.1 * Matrix2::Identity();

  const SrmMoments moments = row_col_effects(fit.resid, S.mask());
  state.srm.rho = std::clamp(moments.rho_hat, -0.9, 0.9);
  state.srm.sigma2 = gaussian ? std::max(moments.sigma2_hat, 1e-6) : 1.0;

  state.mult = MultiplicativeEffects::zeros(n, r);
  if (r > 0) {
    Eigen::JacobiSVD<Matrix> svd(fit.resid, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector root = svd.singularValues().head(r).cwiseSqrt();
    state.mult.U = svd.matrixU().leftCols(r) * root.asDiagonal();
    state.mult.V = svd.matrixV().leftCols(r) * root.asDiagonal();
    state.mult.Psi = Matrix::Identity(2 * r, 2 * r);
  }

  // fill unobserved cells with the fitted means
  const Matrix mu = cell_means(state, X);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (!S.observed(i, j)) state.Y(i, j) = mu(i, j);
  return state;
}

void gibbs_step(ChainState& state, const Sociomatrix& S, const DyadicDesign& X,
                const ModelConfig& config, Random& rng) {
  const bool gaussian = S.kind() == DataKind::continuous;
  SrrmStepOptions srrm_options;
  srrm_options.update_sigma2 = gaussian;
  srrm_options.impute_missing = gaussian;
  srrm_gibbs_step(state, S.mask(), X, config.prior, rng, srrm_options);

  if (config.rank > 0) {
    state.mult.Psi = psi_wishart_update(state.mult.U, state.mult.V, config.prior.Psi0,
                                        config.prior.kappa0, rng);
    update_factor_columns(state, X, rng, config.factor);
  }

  if (!gaussian) {
    const Matrix mu = cell_means(state, X);
    constrained_latent_update(state, mu, S, rng, config.transform);
    if (config.check_constraints) {
      const int bad = count_constraint_violations(S, state.Y, config.transform);
      if (bad > 0)
        throw NumericalError("latent matrix left its constraint set in " + std::to_string(bad) +
                             " cells");
    }
  }
  ++state.iteration;
}

Draw snapshot(const ChainState& state, int chain) {
  Draw d;
  d.chain = chain;
  d.iteration = state.iteration;
  d.beta = state.beta;
  d.Sigma = state.srm.Sigma;
  d.sigma2 = state.srm.sigma2;
  d.rho = state.srm.rho;
  d.Psi = state.mult.Psi;
  d.tr_psi_uv = state.mult.rank > 0 ? state.mult.psi_uv().trace() : 0.0;
  d.a = state.srm.a;
  d.b = state.srm.b;
  d.U = state.mult.U;
  d.V = state.mult.V;
  return d;
}

std::vector<Draw> run_chain(const Sociomatrix& S, const DyadicDesign& X, const ModelConfig& config,
                            const ChainSettings& settings, std::uint64_t seed, int chain,
                            Matrix* uv_sum) {
  settings.validate();
  config.prior.validate(X.p(), config.rank);
  Random rng = Random::stream(seed, static_cast<std::uint64_t>(chain));
  ChainState state = initialize_chain(S, X, config);
  state.rng_seed = seed;

  std::vector<Draw> draws;
  draws.reserve(static_cast<std::size_t>(settings.stored()));
  if (uv_sum) *uv_sum = Matrix::Zero(S.n(), S.n());
  for (long it = 1; it <= settings.iterations; ++it) {
    const ChainState before = state;
    try {
      gibbs_step(state, S, X, config, rng);
    } catch (const std::exception& e) {
      throw ChainFailure(std::string(e.what()) + " (chain " + std::to_string(chain) + ", iteration " +
                             std::to_string(it) + ")",
                         chain, it, before);
    }
    if (it > settings.burn_in && (it - settings.burn_in) % settings.thin == 0) {
      draws.push_back(snapshot(state, chain));
      if (uv_sum && config.rank > 0) *uv_sum += state.mult.uv();
    }
  }
  return draws;
}

PosteriorSamples run_chains(const Sociomatrix& S, const DyadicDesign& X, const ModelConfig& config,
                            const ChainSettings& settings, std::uint64_t seed, int chains) {
  if (chains < 1) throw DataError("need at least one chain");
  std::vector<Matrix> sums(chains);
  std::vector<std::future<std::vector<Draw>>> jobs;
  for (int c = 0; c < chains; ++c)
    jobs.push_back(std::async(std::launch::async, [&, c] {
      return run_chain(S, X, config, settings, seed, c, &sums[c]);
    }));

  PosteriorSamples out;
  out.kind = S.kind();
  out.rank = config.rank;
  out.regressors = X.names();
  out.uv_sum = Matrix::Zero(S.n(), S.n());
  for (int c = 0; c < chains; ++c) {
    std::vector<Draw> draws = jobs[c].get();
    if (config.rank > 0) {
      out.uv_sum += sums[c];
      out.uv_count += static_cast<long>(draws.size());
    }
    std::move(draws.begin(), draws.end(), std::back_inserter(out.draws));
  }
  return out;
}

}  // namespace ame
