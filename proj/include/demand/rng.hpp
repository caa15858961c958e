#pragma once
// Deterministic random-number generation. Every stochastic routine in the
// library draws through this wrapper so that a seed fully determines all
// outputs, bit for bit, across runs and platforms:
//   - the engine is std::mt19937_64, whose output sequence is fixed by the
//     standard (unlike std::uniform_*_distribution, which is
//     implementation-defined and therefore never used here);
//   - uniforms take the top 53 bits of one engine draw;
//   - gaussians use the Box-Muller transform with a cached spare;
//   - integer bounds use rejection sampling;
//   - matrices fill in row-major order regardless of storage layout.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "demand/matrix.hpp"

namespace demand {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1): top 53 bits scaled by 2^-53.
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; used where a log of the draw must stay finite.
  double uniform01_open() {
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; generates pairs, caches the spare.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, n) by rejection (no modulo bias).
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  // Fill in row-major order with scale * U[0,1).
  void fill_uniform(Matrix& m, double scale = 1.0) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        m(i, j) = scale * uniform01();
      }
    }
  }

  // Fill in row-major order with scale * N(0,1).
  void fill_gaussian(Matrix& m, double scale = 1.0) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        m(i, j) = scale * gaussian();
      }
    }
  }

  // Fisher-Yates permutation of [0, n).
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
      std::swap(idx[i], idx[j]);
    }
    return idx;
  }

  // k distinct values from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace demand
