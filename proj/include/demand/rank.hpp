#pragma once
// Automatic component-count (rank) estimation from the diagonal of a
// column-pivoted QR factorization. Three statistics are computed over the
// non-increasing diagonal magnitudes d:
//
//   weighted ratio       wr_p ~ d_p / d_{p+1}      (then scaled by (L-2)/sum)
//   weighted difference  wd_p = |d_{p+1} - d_p| / (d_1 + ... + d_p)
//   weighted correlation wc   = change in windowed correlation, scaled by
//                              a cumulative-sum weight
//
// Each statistic votes with its argmax position (position p measures the
// transition between d_p and d_{p+1}; ties break to the lowest index).
// The estimate is clamp(max(votes), min_rank, L-1), so it always lies
// strictly below min(rows, cols) for non-degenerate inputs.

#include <vector>

#include "demand/matrix.hpp"

namespace demand {

struct RankConfig {
  int wc_window = 3;        // window length for the correlation statistic
  double eps_denom = 1e-12; // floor applied to every denominator
  int min_rank = 1;         // lower bound on the returned estimate

  void validate() const {
    if (wc_window < 2) throw ConfigError("rank.wc_window must be >= 2");
    if (!(eps_denom > 0.0)) throw ConfigError("rank.eps_denom must be > 0");
    if (min_rank < 1) throw ConfigError("rank.min_rank must be >= 1");
  }
};

struct RankEstimate {
  std::vector<double> diag;  // |R_ii| from the pivoted QR, non-increasing
  int wr_pos = 1;            // argmax position of each statistic (1-based)
  int wd_pos = 1;
  int wc_pos = 1;
  int est = 1;               // combined estimate
};

// Magnitudes of the pivoted-QR diagonal of m, non-increasing.
std::vector<double> qr_diag_magnitudes(const Matrix& m);

// Ratio statistic: raw ratios d_p / max(d_{p+1}, eps), p = 1..L-1, scaled
// by the positive constant (L-2)/sum(raw). The scaling never moves the
// argmax. Requires length(d) >= 2.
std::vector<double> weighted_ratio(const std::vector<double>& d,
                                   const RankConfig& cfg = RankConfig{});

// Difference statistic: |d_{p+1} - d_p| / max(d_1 + ... + d_p, eps),
// p = 1..L-1. Requires length(d) >= 2.
std::vector<double> weighted_difference(const std::vector<double>& d,
                                        const RankConfig& cfg = RankConfig{});

// Correlation statistic over sliding windows of length w: entry p
// (p = 1..L-w-1) compares the correlation of the two windows ending at
// positions w+p-1 and w+p with that of the windows ending at w+p and
// w+p+1, scaled by a cumulative-sum weight. Windows with negligible
// variation count as constant (correlation 0). Returns an empty vector
// when length(d) < w + 2 (statistic skipped; callers report position 1).
std::vector<double> weighted_correlation(const std::vector<double>& d, int w,
                                         const RankConfig& cfg = RankConfig{});

// Full estimate for a matrix: pivoted QR -> diagonal -> three votes ->
// clamp(max(votes), min_rank, L-1). A 1xN or Nx1 input yields est = 1.
RankEstimate estimate_rank(const Matrix& m, const RankConfig& cfg = RankConfig{});

}  // namespace demand
