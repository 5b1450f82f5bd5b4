#pragma once

#include "ame/core.hpp"
#include "ame/random.hpp"
#include "ame/sampler.hpp"

#include <vector>

namespace ame {

/// Sum over ordered triples of pairwise-distinct nodes of e_ij e_jk e_ki.
/// The diagonal of E is ignored.
double triadic_stat(const Matrix& E);

/// Residuals of the least-squares row/column/regression fit on the observed
/// scale of S; zero on unobserved cells.
Matrix gof_residuals(const Sociomatrix& S, const DyadicDesign& X);

/// Draw of a replicate data set from one stored posterior state. Ordinal
/// replicates are cut at the empirical quantiles that reproduce the observed
/// level frequencies, since the ordinal link is left unspecified.
Sociomatrix replicate_data(const Draw& draw, const Sociomatrix& S, const DyadicDesign& X,
                           Random& rng);

struct GofResult {
  double observed = 0.0;
  std::vector<double> replicates;
  /// 2 min(P(T* >= T), P(T* <= T)), capped at 1.
  double tail_probability = 1.0;

  double quantile(double q) const;
  /// Whether the observed value lies in the central `level` predictive interval.
  bool inside_central(double level = 0.95) const;
};

GofResult posterior_predictive_gof(const PosteriorSamples& samples, const Sociomatrix& S,
                                   const DyadicDesign& X, Random& rng);

}  // namespace ame
