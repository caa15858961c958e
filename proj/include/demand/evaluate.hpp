#pragma once
// Component-level comparison metrics. A "component" is one spatial map: a
// row of an activated feature matrix. The operations here compare two
// unordered collections of such maps:
//
//   pearson           correlation between two equal-length maps
//   hausdorff         distance between two maps' thresholded active sets
//   match_components  greedy max-|pearson| pairing of two map collections
//   reproducibility   split rows in half, decompose each half, match the
//                     halves' first-layer maps and report the agreement
//
// All routines are deterministic; reproducibility's split is driven by an
// explicit seed.

#include <string>
#include <vector>

#include "demand/decompose.hpp"
#include "demand/matrix.hpp"

namespace demand {

// A stack of component maps: one per row, all the same length. Labels,
// when present, name rows one-to-one.
struct ComponentSet {
  Matrix maps;
  std::vector<std::string> labels;

  void validate() const {
    if (maps.rows() < 1 || maps.cols() < 1) {
      throw ShapeError("ComponentSet: needs at least one nonempty row");
    }
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != maps.rows()) {
      throw ShapeError("ComponentSet: label count must match row count");
    }
  }
};

// Pearson correlation of two equal-length vectors (length >= 2). By
// convention a vector with (numerically) zero variance correlates 0 with
// everything, including itself.
double pearson(const Vector& a, const Vector& b);

// Hausdorff distance between the active index sets of two maps. A map
// entry is active when its absolute value exceeds mean + 1 standard
// deviation of that map's absolute values. If either active set is empty
// the map length is returned as a sentinel.
double hausdorff(const Vector& a, const Vector& b);

// One matched pair of rows and the |pearson| that selected it.
struct MatchedPair {
  int a_row = 0;
  int b_row = 0;
  double abs_corr = 0.0;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;  // in greedy selection order (strongest first)
  std::vector<int> unmatched_a;    // surplus rows, ascending
  std::vector<int> unmatched_b;
  double mean_abs_corr = 0.0;      // mean over pairs
};

// Greedy maximum-|pearson| matching without replacement: repeatedly pair
// the most-correlated remaining rows until the smaller set is exhausted.
// Ties break to the lowest (a_row, b_row).
MatchResult match_components(const ComponentSet& a, const ComponentSet& b);

// Report of the split-half protocol below.
struct ReproducibilityReport {
  std::vector<Eigen::Index> half_a_rows;  // disjoint, union = all input rows
  std::vector<Eigen::Index> half_b_rows;
  MatchResult match;                      // first-layer maps, half A vs half B
  std::vector<double> pair_hausdorff;     // aligned with match.pairs
  double mean_abs_corr = 0.0;
};

// Split the input's rows into two disjoint halves with a seeded shuffle
// (sizes floor(t/2) and ceil(t/2)), decompose each half under cfg, then
// match the halves' activated first-layer maps. Requires >= 4 rows.
ReproducibilityReport reproducibility(const Matrix& input, const DemandConfig& cfg,
                                      std::uint64_t split_seed);

}  // namespace demand
