#pragma once

#include "ame/core.hpp"
#include "ame/random.hpp"

#include <optional>
#include <vector>

namespace ame {

/// E = cZ + dZ^T with Z standard normal: dyadic pairs have covariance
/// sigma2 [[1, rho], [rho, 1]] and the diagonal has variance sigma2 (1 + rho).
Matrix simulate_srm_noise(int n, double sigma2, double rho, Random& rng);

struct SimulationSpec {
  int n = 0;
  DyadicDesign design;  // p = 0 allowed
  Vector beta;
  Matrix2 Sigma = Matrix2::Identity();
  double sigma2 = 1.0;
  double rho = 0.0;
  int rank = 0;
  Matrix Psi;  // 2r x 2r
  DataKind kind = DataKind::continuous;
  int ordinal_levels = 4;
  /// Cut points for ordinal data; default standard normal quantiles at equal mass.
  std::vector<double> thresholds;
  int frn_max = 5;
  /// Probability that an off-diagonal cell is reported missing.
  double missing_rate = 0.0;

  void validate() const;
};

/// Observed data together with every latent quantity that produced it.
struct Simulation {
  Sociomatrix S;
  Matrix Y;  // latent continuous matrix, diagonal included
  Matrix M;  // regression part
  Vector a, b;
  Matrix U, V;
  Matrix E;
  std::vector<double> thresholds;
};

std::vector<double> equal_mass_thresholds(int levels);

/// Y = M + a1^T + 1b^T + UV^T + E, then S = g(Y) for the requested family.
Simulation simulate_ame(const SimulationSpec& spec, Random& rng);

/// Applies the observation map of `kind` to a latent matrix.
Sociomatrix observe(const Matrix& Y, const Mask& mask, DataKind kind,
                    const std::vector<double>& thresholds, int frn_max,
                    std::vector<std::string> labels = {});

}  // namespace ame
