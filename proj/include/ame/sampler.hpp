#pragma once

#include "ame/core.hpp"
#include "ame/multiplicative.hpp"
#include "ame/random.hpp"
#include "ame/transforms.hpp"

#include <cstdint>
#include <vector>

namespace ame {

struct ModelConfig {
  int rank = 0;
  PriorSpec prior;
  TransformOptions transform;
  FactorUpdateOptions factor;
  /// Verify Y in C(S) after every latent sweep and abort on a violation.
  bool check_constraints = false;
};

struct ChainSettings {
  long iterations = 10000;
  long burn_in = 1000;
  long thin = 10;

  void validate() const;
  /// Number of stored draws per chain.
  long stored() const { return (iterations - burn_in) / thin; }
};

/// One stored state of a chain.
struct Draw {
  int chain = 0;
  long iteration = 0;
  Vector beta;
  Matrix2 Sigma;
  double sigma2 = 1.0;
  double rho = 0.0;
  Matrix Psi;
  double tr_psi_uv = 0.0;
  Vector a, b;
  Matrix U, V;
};

struct PosteriorSamples {
  DataKind kind = DataKind::continuous;
  int rank = 0;
  std::vector<std::string> regressors;
  std::vector<Draw> draws;
  /// Running sum of UV^T over stored draws.
  Matrix uv_sum;
  long uv_count = 0;

  Matrix uv_mean() const;
  /// Stored values of beta_k across draws.
  std::vector<double> beta_trace(int k) const;
};

/// Thrown when a chain fails; carries the state at the failing scan.
class ChainFailure : public NumericalError {
 public:
  ChainFailure(const std::string& what, int chain, long iteration, ChainState state)
      : NumericalError(what), chain_(chain), iteration_(iteration), state_(std::move(state)) {}
  int chain() const { return chain_; }
  long iteration() const { return iteration_; }
  const ChainState& state() const { return state_; }

 private:
  int chain_;
  long iteration_;
  ChainState state_;
};

/// Starting state: a latent Y inside C(S), least-squares regression and
/// additive effects, moment-based variance components and an SVD split of
/// the remaining residual into U and V.
ChainState initialize_chain(const Sociomatrix& S, const DyadicDesign& X, const ModelConfig& config);

/// One full Gibbs scan. Continuous data: SRRM step on Y - UV^T with missing
/// values imputed, then Psi, then U and V. Transformation families keep
/// sigma2 = 1 and finish with the constrained latent sweep.
void gibbs_step(ChainState& state, const Sociomatrix& S, const DyadicDesign& X,
                const ModelConfig& config, Random& rng);

Draw snapshot(const ChainState& state, int chain);

/// Runs one chain from `Random::stream(seed, chain)` and returns its stored draws.
std::vector<Draw> run_chain(const Sociomatrix& S, const DyadicDesign& X, const ModelConfig& config,
                            const ChainSettings& settings, std::uint64_t seed, int chain,
                            Matrix* uv_sum = nullptr);

/// Runs `chains` independent chains in parallel and pools their draws in chain order.
PosteriorSamples run_chains(const Sociomatrix& S, const DyadicDesign& X, const ModelConfig& config,
                            const ChainSettings& settings, std::uint64_t seed, int chains);

}  // namespace ame
