#pragma once
// Elementwise activation N, its derivative, inverse, and the inverse's
// derivative. Two kinds: Sigmoid (the working nonlinearity) and Identity
// (a debug/ablation mode).
//
// Sigmoid outputs are clamped into the open interval (0, 1): the smallest
// positive double on the left, the largest double below 1 on the right.
// That keeps exact 0/1 out of downstream logs and reciprocals. The
// inverse (logit) additionally clamps its argument into
// [kDomainEps, 1 - kDomainEps] so out-of-range values stay finite.

#include <algorithm>
#include <cmath>
#include <limits>

#include "demand/matrix.hpp"

namespace demand {

enum class ActivationKind { Sigmoid, Identity };

// Logit domain clamp half-width.
inline constexpr double kDomainEps = 1e-6;

namespace detail {

inline double sigmoid_scalar(double x) {
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  const double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(s, lo, hi);
}

inline double clamp_unit(double p) {
  return std::clamp(p, kDomainEps, 1.0 - kDomainEps);
}

}  // namespace detail

// Elementwise N(m).
inline Matrix apply(ActivationKind kind, const Matrix& m) {
  if (kind == ActivationKind::Identity) return m;
  return m.unaryExpr([](double x) { return detail::sigmoid_scalar(x); });
}

// Elementwise derivative of N at m (pre-activation points).
inline Matrix derivative(ActivationKind kind, const Matrix& m) {
  if (kind == ActivationKind::Identity) return Matrix::Ones(m.rows(), m.cols());
  return m.unaryExpr([](double x) {
    const double s = detail::sigmoid_scalar(x);
    return s * (1.0 - s);
  });
}

// Clamp m into the activation's invertible domain:
// [kDomainEps, 1 - kDomainEps] for sigmoid, unchanged for identity.
inline Matrix clamp_to_domain(ActivationKind kind, const Matrix& m) {
  if (kind == ActivationKind::Identity) return m;
  return m.unaryExpr([](double x) { return detail::clamp_unit(x); });
}

// Elementwise N^{-1}(m); sigmoid entries are clamped into
// [kDomainEps, 1 - kDomainEps] before the logit.
inline Matrix inverse(ActivationKind kind, const Matrix& m) {
  if (kind == ActivationKind::Identity) return m;
  return m.unaryExpr([](double x) {
    const double p = detail::clamp_unit(x);
    return std::log(p / (1.0 - p));
  });
}

// Elementwise derivative of N^{-1} at m, with the same domain clamp:
// 1 / (p (1 - p)) for sigmoid, all ones for identity.
inline Matrix inverse_derivative(ActivationKind kind, const Matrix& m) {
  if (kind == ActivationKind::Identity) return Matrix::Ones(m.rows(), m.cols());
  return m.unaryExpr([](double x) {
    const double p = detail::clamp_unit(x);
    return 1.0 / (p * (1.0 - p));
  });
}

}  // namespace demand
