#pragma once

#include "ame/core.hpp"

#include <cstdint>
#include <random>
#include <span>

namespace ame {

/// Seeded random stream owned by one chain.
class Random {
 public:
  explicit Random(std::uint64_t seed);
  /// Independent stream for chain/replicate `index` under a master seed.
  static Random stream(std::uint64_t seed, std::uint64_t index);

  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gamma(double shape, double rate);
  double chi_square(double df);
  /// Index drawn with probability proportional to exp(log_weights).
  std::size_t categorical_log(std::span<const double> log_weights);
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);
  Vector normal_vector(Eigen::Index size);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

double normal_cdf(double x);
double normal_quantile(double p);

/// Standard normal truncated to (lo, hi), by inverse CDF.
///
/// Intervals lying in the right tail are reflected into the left tail so the
/// CDF values entering the inversion keep full relative precision. Bounds
/// beyond the range where the normal CDF underflows fall back to an exact
/// exponential-proposal rejection sampler.
double truncated_standard_normal(double lo, double hi, Random& rng);

/// N(mean, sd^2) truncated to (lo, hi). Throws NumericalError when lo >= hi.
double truncated_normal(double mean, double sd, double lo, double hi, Random& rng);

/// CDF of N(mean, sd^2) truncated to (lo, hi), evaluated at x.
double truncated_normal_cdf(double x, double mean, double sd, double lo, double hi);

}  // namespace ame
