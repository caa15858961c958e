#pragma once
// Dense matrix carrier and the linear-algebra kernels the rest of the
// library builds on: checked multiplication, norms, and column-pivoted QR.
//
// Matrices are Eigen double matrices. All kernels are pure functions; a
// matrix is never mutated after construction, so values are safe to share
// across threads. Entries are expected to be finite; boundary layers
// (file readers, the decomposer entry point, the generator) enforce this
// with require_finite so interior kernels can assume it.

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace demand {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Shape/conformability violations (operand dimensions in the message).
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid scalar arguments or out-of-range indices.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Unusable input data (non-finite entries, malformed files, ...).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration documents or generator specs.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InputError(std::string(what) + ": matrix contains non-finite entries");
  }
}

// Checked product a*b; dimension mismatch names both operand shapes.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: cannot multiply " + shape_str(a) + " by " + shape_str(b));
  }
  return a * b;
}

struct PivotedQr {
  Matrix q;                   // rows x k, orthonormal columns (k = min(rows, cols))
  Matrix r;                   // k x cols, upper triangular, |diag| non-increasing
  std::vector<Eigen::Index> perm;  // column permutation: input.col(perm[j]) ~ (q*r).col(j)
};

// Column-pivoted QR. The permutation orders columns so the magnitudes of
// r's diagonal are non-increasing, which downstream rank estimation
// relies on. input * P == q * r where P maps column j of the factored
// product back to column perm[j] of the input.
inline PivotedQr qr_pivoted(const Matrix& m) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw ParameterError("qr_pivoted: matrix must be nonempty");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  const Eigen::Index k = std::min(m.rows(), m.cols());
  PivotedQr out;
  out.q = qr.householderQ() * Matrix::Identity(m.rows(), k);
  out.r = Matrix(qr.matrixR().topRows(k).template triangularView<Eigen::Upper>());
  const auto& idx = qr.colsPermutation().indices();
  out.perm.assign(idx.data(), idx.data() + idx.size());
  return out;
}

inline double frobenius_norm(const Matrix& m) { return m.norm(); }

inline double l1_norm(const Matrix& m) { return m.cwiseAbs().sum(); }

inline double max_abs_entry(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace demand
