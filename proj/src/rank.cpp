#include "demand/rank.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace demand {

namespace {

// Relative-variation floor for the correlation statistic: a window whose
// standard deviation is at most this fraction of its mean magnitude is
// treated as constant (correlation 0). Plateau regions of a spectrum
// otherwise produce correlations dominated by rounding noise, which makes
// the statistic vote for arbitrary deep positions on noisy inputs.
constexpr double kFlatRtol = 0.5;

std::size_t argmax_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

struct WindowStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

WindowStats window_stats(const std::vector<double>& d, std::size_t begin, std::size_t len) {
  WindowStats s;
  for (std::size_t i = 0; i < len; ++i) s.mean += d[begin + i];
  s.mean /= static_cast<double>(len);
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double dev = d[begin + i] - s.mean;
    acc += dev * dev;
  }
  s.stddev = std::sqrt(acc / static_cast<double>(len));
  return s;
}

// Pearson correlation of two windows of d, with the flatness conventions:
// a window that is constant at the scale of the leading diagonal entry, or
// whose relative variation is below kFlatRtol, contributes correlation 0.
double window_pearson(const std::vector<double>& d, std::size_t beg_a, std::size_t beg_b,
                      std::size_t w, double scale, double eps) {
  const WindowStats sa = window_stats(d, beg_a, w);
  const WindowStats sb = window_stats(d, beg_b, w);
  for (const WindowStats& s : {sa, sb}) {
    if (s.stddev <= eps * scale) return 0.0;
    if (s.stddev <= kFlatRtol * std::abs(s.mean)) return 0.0;
  }
  double cov = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    cov += (d[beg_a + i] - sa.mean) * (d[beg_b + i] - sb.mean);
  }
  cov /= static_cast<double>(w);
  return cov / (sa.stddev * sb.stddev);
}

std::vector<double> raw_ratios(const std::vector<double>& d, double eps) {
  std::vector<double> out(d.size() - 1);
  for (std::size_t p = 0; p + 1 < d.size(); ++p) {
    out[p] = d[p] / std::max(d[p + 1], eps);
  }
  return out;
}

}  // namespace

std::vector<double> qr_diag_magnitudes(const Matrix& m) {
  const PivotedQr qr = qr_pivoted(m);
  const Eigen::Index k = std::min(qr.r.rows(), qr.r.cols());
  std::vector<double> d(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) d[static_cast<std::size_t>(i)] = std::abs(qr.r(i, i));
  return d;
}

std::vector<double> weighted_ratio(const std::vector<double>& d, const RankConfig& cfg) {
  cfg.validate();
  const std::size_t L = d.size();
  if (L < 2) throw ParameterError("weighted_ratio: need at least 2 diagonal values");
  std::vector<double> out = raw_ratios(d, cfg.eps_denom);
  double sum = 0.0;
  for (double r : out) sum += r;
  const double scale = static_cast<double>(L - 2) / std::max(sum, cfg.eps_denom);
  for (double& r : out) r *= scale;
  return out;
}

std::vector<double> weighted_difference(const std::vector<double>& d, const RankConfig& cfg) {
  cfg.validate();
  const std::size_t L = d.size();
  if (L < 2) throw ParameterError("weighted_difference: need at least 2 diagonal values");
  std::vector<double> out(L - 1);
  double cum = 0.0;
  for (std::size_t p = 0; p + 1 < L; ++p) {
    cum += d[p];
    out[p] = std::abs(d[p + 1] - d[p]) / std::max(cum, cfg.eps_denom);
  }
  return out;
}

std::vector<double> weighted_correlation(const std::vector<double>& d, int w,
                                         const RankConfig& cfg) {
  cfg.validate();
  if (w < 2) throw ParameterError("weighted_correlation: window must be >= 2");
  const std::size_t L = d.size();
  const std::size_t wlen = static_cast<std::size_t>(w);
  if (L < wlen + 2) return {};
  const double scale = std::max(d[0], cfg.eps_denom);
  std::vector<double> out;
  out.reserve(L - wlen - 1);
  // i is the 1-based right edge of the newest window; the three windows
  // involved end at i-2, i-1, and i. Window ending at 1-based j covers
  // 0-based entries [j-w, j).
  for (std::size_t i = wlen + 2; i <= L; ++i) {
    const double c1 = window_pearson(d, i - 2 - wlen, i - 1 - wlen, wlen, scale, cfg.eps_denom);
    const double c2 = window_pearson(d, i - 1 - wlen, i - wlen, wlen, scale, cfg.eps_denom);
    double den = 0.0;
    const std::size_t upto = std::min(i + 1, L);
    for (std::size_t k = 0; k < upto; ++k) den += d[k];
    out.push_back(std::abs(c1 - c2) / std::max(den, cfg.eps_denom));
  }
  return out;
}

RankEstimate estimate_rank(const Matrix& m, const RankConfig& cfg) {
  cfg.validate();
  RankEstimate res;
  res.diag = qr_diag_magnitudes(m);
  const std::size_t L = res.diag.size();
  if (L == 1) {
    res.wr_pos = res.wd_pos = res.wc_pos = 1;
    res.est = 1;
    return res;
  }
  const std::vector<double> wr = raw_ratios(res.diag, cfg.eps_denom);
  const std::vector<double> wd = weighted_difference(res.diag, cfg);
  res.wr_pos = static_cast<int>(argmax_lowest(wr)) + 1;
  res.wd_pos = static_cast<int>(argmax_lowest(wd)) + 1;
  const std::vector<double> wc = weighted_correlation(res.diag, cfg.wc_window, cfg);
  res.wc_pos = wc.empty() ? 1 : static_cast<int>(argmax_lowest(wc)) + 1;
  const int combined = std::max({res.wr_pos, res.wd_pos, res.wc_pos, cfg.min_rank});
  const int cap = static_cast<int>(L) - 1;
  res.est = std::max(1, std::min(combined, cap));
  return res;
}

}  // namespace demand
