#include "ame/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CellBounds unbounded(Eigen::Index n) {
  return {Matrix::Constant(n, n, -kInf), Matrix::Constant(n, n, kInf)};
}

int level_of(const Sociomatrix& S, Eigen::Index i, Eigen::Index j) {
  return static_cast<int>(S.values()(i, j));
}

// Lower bound for level l is the max over all strictly smaller levels; upper
// bound the min over all strictly larger levels.
void fill_from_level_extremes(const std::vector<double>& level_max,
                              const std::vector<double>& level_min, std::vector<double>& below,
                              std::vector<double>& above) {
  const std::size_t levels = level_max.size();
  below.assign(levels, -kInf);
  above.assign(levels, kInf);
  for (std::size_t l = 1; l < levels; ++l) below[l] = std::max(below[l - 1], level_max[l - 1]);
  for (std::size_t l = levels - 1; l-- > 0;) above[l] = std::min(above[l + 1], level_min[l + 1]);
}

}  // namespace

CellBounds binary_bounds(const Sociomatrix& S) {
  if (S.kind() != DataKind::binary) throw DataError("binary_bounds needs binary data");
  const Eigen::Index n = S.n();
  CellBounds b = unbounded(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!S.observed(i, j)) continue;
      if (S.values()(i, j) == 1.0) {
        b.lo(i, j) = 0.0;
      } else {
        b.hi(i, j) = 0.0;
      }
    }
  }
  return b;
}

CellBounds ordinal_bounds(const Sociomatrix& S, const Matrix& Y, bool within_row) {
  const Eigen::Index n = S.n();
  const int levels = S.level_count();
  CellBounds b = unbounded(n);
  std::vector<double> below, above;

  auto process = [&](Eigen::Index row_begin, Eigen::Index row_end) {
    std::vector<double> level_max(levels, -kInf), level_min(levels, kInf);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = row_begin; i < row_end; ++i) {
        if (!S.observed(i, j)) continue;
        const int l = level_of(S, i, j);
        level_max[l] = std::max(level_max[l], Y(i, j));
        level_min[l] = std::min(level_min[l], Y(i, j));
      }
    }
    fill_from_level_extremes(level_max, level_min, below, above);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = row_begin; i < row_end; ++i) {
        if (!S.observed(i, j)) continue;
        const int l = level_of(S, i, j);
        b.lo(i, j) = below[l];
        b.hi(i, j) = above[l];
      }
    }
  };

  if (within_row) {
    for (Eigen::Index i = 0; i < n; ++i) process(i, i + 1);
  } else {
    process(0, n);
  }
  return b;
}

CellBounds frn_bounds(const Sociomatrix& S, const Matrix& Y) {
  if (S.kind() != DataKind::frn) throw DataError("frn_bounds needs frn data");
  const Eigen::Index n = S.n();
  const int m = S.frn_max();
  CellBounds b = unbounded(n);
  std::vector<double> below, above;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> level_max(m + 1, -kInf), level_min(m + 1, kInf);
    int degree = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!S.observed(i, j)) continue;
      const int l = level_of(S, i, j);
      if (l > 0) ++degree;
      level_max[l] = std::max(level_max[l], Y(i, j));
      level_min[l] = std::min(level_min[l], Y(i, j));
    }
    if (degree > m) throw DataError("row " + std::to_string(i) + " exceeds the nomination cap");
    fill_from_level_extremes(level_max, level_min, below, above);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!S.observed(i, j)) continue;
      const int l = level_of(S, i, j);
      if (l > 0) {
        // ranked: positive, and above every lower-ranked partner
        b.lo(i, j) = std::max(0.0, below[l]);
        b.hi(i, j) = above[l];
      } else {
        // unranked: below every ranked partner; non-positive unless censored
        b.lo(i, j) = -kInf;
        b.hi(i, j) = degree < m ? std::min(0.0, above[0]) : above[0];
      }
    }
  }
  return b;
}

CellBounds constraint_bounds(const Sociomatrix& S, const Matrix& Y, const TransformOptions& options) {
  switch (S.kind()) {
    case DataKind::binary: return binary_bounds(S);
    case DataKind::ordinal: return ordinal_bounds(S, Y, options.ordinal_within_row);
    case DataKind::frn: return frn_bounds(S, Y);
    case DataKind::continuous: break;
  }
  return unbounded(S.n());
}

int count_constraint_violations(const Sociomatrix& S, const Matrix& Y, const TransformOptions& options) {
  if (S.kind() == DataKind::continuous) return 0;
  const CellBounds b = constraint_bounds(S, Y, options);
  int bad = 0;
  for (Eigen::Index j = 0; j < Y.cols(); ++j)
    for (Eigen::Index i = 0; i < Y.rows(); ++i)
      if (S.observed(i, j) && !(Y(i, j) > b.lo(i, j) && Y(i, j) < b.hi(i, j))) ++bad;
  return bad;
}

Matrix initial_latent(const Sociomatrix& S) {
  const Eigen::Index n = S.n();
  Matrix Y = Matrix::Zero(n, n);
  switch (S.kind()) {
    case DataKind::continuous: {
      const double fill = [&] {
        double sum = 0.0;
        int count = 0;
        for (Eigen::Index j = 0; j < n; ++j)
          for (Eigen::Index i = 0; i < n; ++i)
            if (S.observed(i, j)) sum += S.values()(i, j), ++count;
        return count > 0 ? sum / count : 0.0;
      }();
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) Y(i, j) = S.observed(i, j) ? S.values()(i, j) : fill;
      break;
    }
    case DataKind::binary:
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          if (S.observed(i, j)) Y(i, j) = S.values()(i, j) == 1.0 ? 0.5 : -0.5;
      break;
    case DataKind::ordinal: {
      // normal scores of mid-ranks; ties share a value
      const int levels = S.level_count();
      std::vector<double> count(levels, 0.0);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          if (S.observed(i, j)) count[level_of(S, i, j)] += 1.0;
      double total = 0.0;
      for (double c : count) total += c;
      std::vector<double> score(levels, 0.0);
      double cumulative = 0.0;
      for (int l = 0; l < levels; ++l) {
        const double mid = (cumulative + 0.5 * count[l]) / total;
        score[l] = normal_quantile(std::clamp(mid, 1e-6, 1.0 - 1e-6));
        cumulative += count[l];
      }
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          if (S.observed(i, j)) Y(i, j) = score[level_of(S, i, j)];
      break;
    }
    case DataKind::frn: {
      const double m = S.frn_max();
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          if (S.observed(i, j)) {
            const double s = S.values()(i, j);
            Y(i, j) = s > 0 ? s / m : -0.5;
          }
      break;
    }
  }
  return Y;
}

void constrained_latent_update(Matrix& Y, const Matrix& mu, double sigma2, double rho,
                               const Sociomatrix& S, Random& rng, const TransformOptions& options) {
  const Eigen::Index n = Y.rows();
  const double sd_diag = std::sqrt(sigma2 * (1.0 + rho));
  const double sd_cond = std::sqrt(sigma2 * (1.0 - rho * rho));
  for (Eigen::Index i = 0; i < n; ++i) Y(i, i) = rng.normal(mu(i, i), sd_diag);

  auto draw = [&](Eigen::Index i, Eigen::Index j, double lo, double hi) {
    const double mean = mu(i, j) + rho * (Y(j, i) - mu(j, i));
    Y(i, j) = truncated_normal(mean, sd_cond, lo, hi, rng);
  };

  const bool fixed_bounds = S.kind() == DataKind::binary || S.kind() == DataKind::continuous;
  const int levels = S.kind() == DataKind::continuous ? 0 : S.level_count();
  CellBounds bounds;
  if (fixed_bounds) bounds = constraint_bounds(S, Y, options);

  for (int level = 0; level < levels; ++level) {
    if (!fixed_bounds) bounds = constraint_bounds(S, Y, options);
    for (int half = 0; half < 2; ++half) {
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          const bool lower = i > j;
          if (i == j || lower != (half == 0)) continue;
          if (!S.observed(i, j) || level_of(S, i, j) != level) continue;
          draw(i, j, bounds.lo(i, j), bounds.hi(i, j));
        }
      }
    }
  }

  // unobserved off-diagonal cells carry no constraint
  for (int half = 0; half < 2; ++half) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const bool lower = i > j;
        if (i == j || lower != (half == 0)) continue;
        if (S.observed(i, j) && S.kind() != DataKind::continuous) continue;
        if (S.observed(i, j)) continue;
        draw(i, j, -kInf, kInf);
      }
    }
  }
}

void constrained_latent_update(ChainState& state, const Matrix& mu, const Sociomatrix& S,
                               Random& rng, const TransformOptions& options) {
  constrained_latent_update(state.Y, mu, state.srm.sigma2, state.srm.rho, S, rng, options);
}

}  // namespace ame
