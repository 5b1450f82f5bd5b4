#include "ame/random.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ame {

Random::Random(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

Random Random::stream(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer keeps neighbouring (seed, index) pairs far apart
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return Random(z ^ (z >> 31));
}

double Random::uniform() {
  double u;
  do {
    u = std::generate_canonical<double, 53>(engine_);
  } while (u <= 0.0);
  return u;
}

double Random::gamma(double shape, double rate) {
  std::gamma_distribution<double> g(shape, 1.0 / rate);
  return g(engine_);
}

double Random::chi_square(double df) { return gamma(df / 2.0, 0.5); }

std::size_t Random::categorical_log(std::span<const double> log_weights) {
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  double total = 0.0;
  for (double w : log_weights) total += std::exp(w - top);
  double u = uniform() * total;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    u -= std::exp(log_weights[k] - top);
    if (u <= 0.0) return k;
  }
  return log_weights.size() - 1;
}

Matrix Random::normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  Matrix z(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = normal();
  return z;
}

Vector Random::normal_vector(Eigen::Index size) {
  Vector z(size);
  for (Eigen::Index i = 0; i < size; ++i) z(i) = normal();
  return z;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

namespace {

// Below this standardized bound the lower-tail CDF loses too much range for
// inversion; exp(-0.5 * 35^2) ~ 1e-266.
constexpr double kInversionLimit = 35.0;

// Exact sampler for a standard normal restricted to (lo, hi), lo > 0 large,
// using a translated exponential proposal.
double tail_rejection(double lo, double hi, Random& rng) {
  const double alpha = 0.5 * (lo + std::sqrt(lo * lo + 4.0));
  for (;;) {
    const double x = lo - std::log(rng.uniform()) / alpha;
    if (x >= hi) continue;
    const double diff = x - alpha;
    if (rng.uniform() <= std::exp(-0.5 * diff * diff)) return x;
  }
}

}  // namespace

double truncated_standard_normal(double lo, double hi, Random& rng) {
  if (!(lo < hi)) {
    throw NumericalError("empty truncation interval (" + std::to_string(lo) + ", " +
                         std::to_string(hi) + ")");
  }
  if (lo >= 0.0) {
    // right tail: reflect so the inversion works with small lower-tail masses
    return -truncated_standard_normal(-hi, -lo, rng);
  }
  // Now lo < 0. If hi is also far out in the left tail, mirror into the
  // rejection sampler.
  if (hi < -kInversionLimit) return -tail_rejection(-hi, -lo, rng);

  const double p_lo = normal_cdf(lo);
  const double p_hi = normal_cdf(hi);
  const double u = rng.uniform();
  double x;
  if (p_hi > 0.5 && lo < -8.0) {
    // mass dominated by the upper part; invert from the upper tail
    const double q_lo = normal_cdf(-lo);
    const double q_hi = normal_cdf(-hi);
    x = -normal_quantile(q_hi + u * (q_lo - q_hi));
  } else {
    x = normal_quantile(p_lo + u * (p_hi - p_lo));
  }
  // guard the open interval against rounding at the ends
  if (!(x > lo)) x = std::nextafter(lo, hi);
  if (!(x < hi)) x = std::nextafter(hi, lo);
  return x;
}

double truncated_normal(double mean, double sd, double lo, double hi, Random& rng) {
  if (!(lo < hi)) {
    throw NumericalError("empty truncation interval (" + std::to_string(lo) + ", " +
                         std::to_string(hi) + ")");
  }
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  double x = mean + sd * truncated_standard_normal(a, b, rng);
  if (!(x > lo)) x = std::nextafter(lo, hi);
  if (!(x < hi)) x = std::nextafter(hi, lo);
  return x;
}

double truncated_normal_cdf(double x, double mean, double sd, double lo, double hi) {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  const double z = (x - mean) / sd;
  if (a >= 0.0) {
    // upper-tail form for accuracy
    const double qa = normal_cdf(-a);
    const double qb = normal_cdf(-b);
    return (qa - normal_cdf(-z)) / (qa - qb);
  }
  const double pa = normal_cdf(a);
  const double pb = normal_cdf(b);
  return (normal_cdf(z) - pa) / (pb - pa);
}

}  // namespace ame
