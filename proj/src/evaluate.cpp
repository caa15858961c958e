#include "demand/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "demand/rng.hpp"

namespace demand {

namespace {

// Variance floor: treat a map as constant when its spread is this small
// relative to its mean magnitude, so rounding jitter on a flat map does
// not manufacture spurious correlations.
constexpr double kConstantRtol = 1e-9;

bool effectively_constant(double sd, double mean) {
  return sd <= 0.0 || sd <= kConstantRtol * std::abs(mean);
}

std::vector<Eigen::Index> active_indices(const Vector& map) {
  const Vector mags = map.cwiseAbs();
  const double mean = mags.mean();
  const double sd = std::sqrt((mags.array() - mean).square().mean());
  const double threshold = mean + sd;
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < mags.size(); ++i) {
    if (mags[i] > threshold) active.push_back(i);
  }
  return active;
}

// sup over a of the distance to the nearest member of b (both ascending).
double directed_distance(const std::vector<Eigen::Index>& a, const std::vector<Eigen::Index>& b) {
  double worst = 0.0;
  std::size_t j = 0;
  for (const Eigen::Index x : a) {
    while (j + 1 < b.size() && std::abs(static_cast<double>(b[j + 1] - x)) <=
                                   std::abs(static_cast<double>(b[j] - x))) {
      ++j;
    }
    worst = std::max(worst, std::abs(static_cast<double>(b[j] - x)));
  }
  return worst;
}

Matrix rows_subset(const Matrix& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

}  // namespace

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw ShapeError("pearson: lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()) + " differ");
  }
  if (a.size() < 2) {
    throw ShapeError("pearson: vectors must have length >= 2");
  }
  const double ma = a.mean();
  const double mb = b.mean();
  const Eigen::ArrayXd da = a.array() - ma;
  const Eigen::ArrayXd db = b.array() - mb;
  const double sa = std::sqrt(da.square().mean());
  const double sb = std::sqrt(db.square().mean());
  if (effectively_constant(sa, ma) || effectively_constant(sb, mb)) return 0.0;
  const double corr = (da * db).mean() / (sa * sb);
  return std::clamp(corr, -1.0, 1.0);
}

double hausdorff(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw ShapeError("hausdorff: lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()) + " differ");
  }
  const std::vector<Eigen::Index> sa = active_indices(a);
  const std::vector<Eigen::Index> sb = active_indices(b);
  if (sa.empty() || sb.empty()) return static_cast<double>(a.size());
  return std::max(directed_distance(sa, sb), directed_distance(sb, sa));
}

MatchResult match_components(const ComponentSet& a, const ComponentSet& b) {
  a.validate();
  b.validate();
  if (a.maps.cols() != b.maps.cols()) {
    throw ShapeError("match_components: map lengths " + std::to_string(a.maps.cols()) + " and " +
                     std::to_string(b.maps.cols()) + " differ");
  }
  const Eigen::Index na = a.maps.rows();
  const Eigen::Index nb = b.maps.rows();
  Matrix score(na, nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    for (Eigen::Index j = 0; j < nb; ++j) {
      score(i, j) = std::abs(pearson(a.maps.row(i).transpose(), b.maps.row(j).transpose()));
    }
  }

  MatchResult result;
  std::vector<bool> used_a(static_cast<std::size_t>(na), false);
  std::vector<bool> used_b(static_cast<std::size_t>(nb), false);
  const Eigen::Index n_pairs = std::min(na, nb);
  double total = 0.0;
  for (Eigen::Index p = 0; p < n_pairs; ++p) {
    double best = -1.0;
    Eigen::Index bi = -1;
    Eigen::Index bj = -1;
    for (Eigen::Index i = 0; i < na; ++i) {
      if (used_a[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index j = 0; j < nb; ++j) {
        if (used_b[static_cast<std::size_t>(j)]) continue;
        if (score(i, j) > best) {  // strict: ties keep the lowest (i, j)
          best = score(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    used_a[static_cast<std::size_t>(bi)] = true;
    used_b[static_cast<std::size_t>(bj)] = true;
    result.pairs.push_back({static_cast<int>(bi), static_cast<int>(bj), best});
    total += best;
  }
  for (Eigen::Index i = 0; i < na; ++i) {
    if (!used_a[static_cast<std::size_t>(i)]) result.unmatched_a.push_back(static_cast<int>(i));
  }
  for (Eigen::Index j = 0; j < nb; ++j) {
    if (!used_b[static_cast<std::size_t>(j)]) result.unmatched_b.push_back(static_cast<int>(j));
  }
  result.mean_abs_corr = result.pairs.empty() ? 0.0 : total / static_cast<double>(n_pairs);
  return result;
}

ReproducibilityReport reproducibility(const Matrix& input, const DemandConfig& cfg,
                                      std::uint64_t split_seed) {
  if (input.rows() < 4) {
    throw InputError("reproducibility: input needs at least 4 rows, got " +
                     std::to_string(input.rows()));
  }
  require_finite(input, "reproducibility");

  Rng rng(split_seed);
  const std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(input.rows()));
  const std::size_t half = perm.size() / 2;

  ReproducibilityReport report;
  for (std::size_t i = 0; i < half; ++i) {
    report.half_a_rows.push_back(static_cast<Eigen::Index>(perm[i]));
  }
  for (std::size_t i = half; i < perm.size(); ++i) {
    report.half_b_rows.push_back(static_cast<Eigen::Index>(perm[i]));
  }

  const DecompositionResult res_a = decompose(rows_subset(input, report.half_a_rows), cfg);
  const DecompositionResult res_b = decompose(rows_subset(input, report.half_b_rows), cfg);

  ComponentSet set_a{apply(cfg.activation, res_a.layers.front().y), {}};
  ComponentSet set_b{apply(cfg.activation, res_b.layers.front().y), {}};
  report.match = match_components(set_a, set_b);
  for (const MatchedPair& pair : report.match.pairs) {
    report.pair_hausdorff.push_back(
        hausdorff(set_a.maps.row(pair.a_row).transpose(), set_b.maps.row(pair.b_row).transpose()));
  }
  report.mean_abs_corr = report.match.mean_abs_corr;
  return report;
}

}  // namespace demand
