#pragma once
// The optimization operators for one layer: Adam with bias correction,
// the soft-threshold (shrinkage) operator that extracts the sparse
// background, and the analytic gradient / value of the per-layer loss
//
//   L(X, Y, S) = lambda/2 ||Phi X N(Y) - (input - S)||_F^2
//                + (1/lambda) ||S||_1
//
// where Phi is the fixed product of the earlier layers' weight matrices.
// S enters the quadratic term as a subtraction from the input so that the
// shrinkage update and the gradient steps optimize the same objective.

#include <cmath>
#include <utility>

#include "demand/activation.hpp"
#include "demand/matrix.hpp"

namespace demand {

struct AdamParams {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Per-parameter Adam accumulators. One state tracks exactly one parameter
// matrix; moments stay shape-locked to it and t counts completed steps.
struct AdamState {
  Matrix m;
  Matrix v;
  long t = 0;
  AdamParams hp;

  AdamState(Eigen::Index rows, Eigen::Index cols, const AdamParams& params)
      : m(Matrix::Zero(rows, cols)), v(Matrix::Zero(rows, cols)), hp(params) {}
};

// One Adam update; mutates the state, returns the stepped parameter.
// All arithmetic is elementwise, so the result is independent of whether
// the parameter is viewed as a matrix or a flat vector.
inline Matrix adam_step(AdamState& state, const Matrix& param, const Matrix& grad) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols() ||
      state.m.rows() != param.rows() || state.m.cols() != param.cols()) {
    throw ShapeError("adam_step: param " + shape_str(param) + ", grad " + shape_str(grad) +
                     ", state " + shape_str(state.m) + " must all agree");
  }
  state.t += 1;
  state.m = state.hp.beta1 * state.m + (1.0 - state.hp.beta1) * grad;
  state.v = state.hp.beta2 * state.v + (1.0 - state.hp.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(state.hp.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.hp.beta2, static_cast<double>(state.t));
  const Matrix mhat = state.m / bc1;
  const Matrix vhat = state.v / bc2;
  return param.array() - state.hp.alpha * mhat.array() / (vhat.array().sqrt() + state.hp.eps);
}

// Elementwise soft threshold sign(x) * max(|x| - threshold, 0).
inline Matrix shrinkage(const Matrix& m, double threshold) {
  if (threshold < 0.0 || !std::isfinite(threshold)) {
    throw ParameterError("shrinkage: threshold must be finite and >= 0");
  }
  return m.unaryExpr([threshold](double x) {
    const double mag = std::abs(x) - threshold;
    return mag > 0.0 ? (x > 0.0 ? mag : -mag) : 0.0;
  });
}

namespace detail {

inline void check_layer_shapes(const Matrix& prefix, const Matrix& xk, const Matrix& yk,
                               const Matrix& sk, const Matrix& input, const char* who) {
  if (prefix.cols() != xk.rows() || xk.cols() != yk.rows() ||
      prefix.rows() != input.rows() || yk.cols() != input.cols() ||
      sk.rows() != input.rows() || sk.cols() != input.cols()) {
    throw ShapeError(std::string(who) + ": nonconformable shapes prefix " + shape_str(prefix) +
                     ", x " + shape_str(xk) + ", y " + shape_str(yk) + ", s " + shape_str(sk) +
                     ", input " + shape_str(input));
  }
}

}  // namespace detail

// Gradients of the layer loss with respect to X and Y, holding the other
// factor, S, and the prefix fixed:
//   E  = Phi X N(Y) - (input - S)
//   gX = lambda Phi^T E N(Y)^T
//   gY = lambda (Phi X)^T E  (elementwise*) N'(Y)
inline std::pair<Matrix, Matrix> grad_layer(const Matrix& prefix, const Matrix& xk,
                                            const Matrix& yk, const Matrix& sk,
                                            const Matrix& input, ActivationKind kind,
                                            double lambda) {
  detail::check_layer_shapes(prefix, xk, yk, sk, input, "grad_layer");
  const Matrix ny = apply(kind, yk);
  const Matrix px = prefix * xk;
  const Matrix err = px * ny - (input - sk);
  Matrix gx = lambda * (prefix.transpose() * err * ny.transpose());
  Matrix gy = (lambda * (px.transpose() * err)).cwiseProduct(derivative(kind, yk));
  return {std::move(gx), std::move(gy)};
}

// Value of the layer loss at (X, Y, S).
inline double layer_loss(const Matrix& prefix, const Matrix& xk, const Matrix& yk,
                         const Matrix& sk, const Matrix& input, ActivationKind kind,
                         double lambda) {
  detail::check_layer_shapes(prefix, xk, yk, sk, input, "layer_loss");
  const Matrix err = prefix * xk * apply(kind, yk) - (input - sk);
  return 0.5 * lambda * err.squaredNorm() + (1.0 / lambda) * l1_norm(sk);
}

}  // namespace demand
