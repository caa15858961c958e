// Optimizer pieces: Adam against a scalar re-derivation, shrinkage
// against hand values and its contraction property, and the analytic
// layer gradient against central finite differences (the key oracle).
#include <cmath>

#include "demand/optimizer.hpp"
#include "demand/rng.hpp"
#include "doctest.h"

using namespace demand;

namespace {

Matrix scalar(double x) {
  Matrix m(1, 1);
  m(0, 0) = x;
  return m;
}

// Central finite difference of layer_loss with respect to one entry.
double fd_entry(Matrix& target, const Matrix& prefix, const Matrix& x, const Matrix& y,
                const Matrix& s, const Matrix& input, ActivationKind kind, double lambda,
                Eigen::Index i, Eigen::Index j, double h) {
  const double saved = target(i, j);
  target(i, j) = saved + h;
  const double up = layer_loss(prefix, x, y, s, input, kind, lambda);
  target(i, j) = saved - h;
  const double down = layer_loss(prefix, x, y, s, input, kind, lambda);
  target(i, j) = saved;
  return (up - down) / (2.0 * h);
}

}  // namespace

TEST_CASE("adam_step reproduces a scalar re-derivation over several steps") {
  AdamParams hp;
  hp.alpha = 0.05;
  hp.beta1 = 0.9;
  hp.beta2 = 0.999;
  hp.eps = 1e-8;
  AdamState st(1, 1, hp);
  double param = 2.0;
  double m = 0.0, v = 0.0;
  Rng rng(17);
  for (int t = 1; t <= 25; ++t) {
    const double g = rng.gaussian();
    const Matrix stepped = adam_step(st, scalar(param), scalar(g));
    m = hp.beta1 * m + (1.0 - hp.beta1) * g;
    v = hp.beta2 * v + (1.0 - hp.beta2) * g * g;
    const double mhat = m / (1.0 - std::pow(hp.beta1, t));
    const double vhat = v / (1.0 - std::pow(hp.beta2, t));
    param -= hp.alpha * mhat / (std::sqrt(vhat) + hp.eps);
    CHECK(stepped(0, 0) == doctest::Approx(param).epsilon(1e-14));
    param = stepped(0, 0);
  }
}

TEST_CASE("adam_step is elementwise: matrix layout does not change values") {
  AdamParams hp;
  Rng rng(23);
  Matrix param(2, 3), grad(2, 3);
  rng.fill_gaussian(param);
  rng.fill_gaussian(grad);

  AdamState st_mat(2, 3, hp);
  const Matrix as_matrix = adam_step(st_mat, param, grad);

  // Same numbers arranged as a 6x1 column.
  Matrix param_col(6, 1), grad_col(6, 1);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      param_col(i * 3 + j, 0) = param(i, j);
      grad_col(i * 3 + j, 0) = grad(i, j);
    }
  }
  AdamState st_col(6, 1, hp);
  const Matrix as_column = adam_step(st_col, param_col, grad_col);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      CHECK(as_matrix(i, j) == as_column(i * 3 + j, 0));
    }
  }
}

TEST_CASE("adam_step first step moves by about alpha against the gradient sign") {
  AdamParams hp;
  hp.alpha = 0.1;
  AdamState st(1, 1, hp);
  const Matrix stepped = adam_step(st, scalar(1.0), scalar(42.0));
  CHECK(stepped(0, 0) == doctest::Approx(1.0 - 0.1).epsilon(1e-6));
}

TEST_CASE("adam_step rejects mismatched shapes") {
  AdamParams hp;
  AdamState st(2, 2, hp);
  CHECK_THROWS_AS(adam_step(st, Matrix::Ones(2, 2), Matrix::Ones(2, 3)), ShapeError);
  CHECK_THROWS_AS(adam_step(st, Matrix::Ones(3, 2), Matrix::Ones(3, 2)), ShapeError);
}

TEST_CASE("shrinkage matches hand values and handles the zero threshold") {
  Matrix m(1, 4);
  m << 0.5, -0.5, 0.05, 0.0;
  const Matrix out = shrinkage(m, 0.1);
  CHECK(out(0, 0) == doctest::Approx(0.4));
  CHECK(out(0, 1) == doctest::Approx(-0.4));
  CHECK(out(0, 2) == 0.0);
  CHECK(out(0, 3) == 0.0);
  CHECK((shrinkage(m, 0.0).array() == m.array()).all());
  CHECK_THROWS_AS(shrinkage(m, -0.1), ParameterError);
  CHECK_THROWS_AS(shrinkage(m, std::numeric_limits<double>::quiet_NaN()), ParameterError);
}

TEST_CASE("shrinkage strictly contracts nonzero matrices for positive thresholds") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m(1 + static_cast<Eigen::Index>(rng.bounded(6)),
             1 + static_cast<Eigen::Index>(rng.bounded(6)));
    rng.fill_gaussian(m);
    const double tau = rng.uniform01_open();
    CHECK(frobenius_norm(shrinkage(m, tau)) < frobenius_norm(m));
  }
}

TEST_CASE("layer gradient matches central finite differences") {
  const double h = 1e-6;
  Rng rng(41);
  for (const auto kind : {ActivationKind::Sigmoid, ActivationKind::Identity}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::Index t = 5, p = 4, r = 3, m = 6;
      Matrix prefix(t, p), x(p, r), y(r, m), input(t, m), s_raw(t, m);
      rng.fill_gaussian(prefix);
      rng.fill_gaussian(x);
      rng.fill_gaussian(y);
      rng.fill_gaussian(input);
      rng.fill_gaussian(s_raw);
      const Matrix s = shrinkage(s_raw, 0.8);
      const double lambda = trial % 2 == 0 ? 10.0 : 2.5;

      const auto [gx, gy] = grad_layer(prefix, x, y, s, input, kind, lambda);
      Matrix x_var = x, y_var = y;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
          const double fd = fd_entry(x_var, prefix, x_var, y, s, input, kind, lambda, i, j, h);
          CHECK(gx(i, j) == doctest::Approx(fd).epsilon(1e-4));
        }
      }
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
          const double fd = fd_entry(y_var, prefix, x, y_var, s, input, kind, lambda, i, j, h);
          CHECK(gy(i, j) == doctest::Approx(fd).epsilon(1e-4));
        }
      }
    }
  }
}

TEST_CASE("layer_loss matches a hand-computed value") {
  const Matrix prefix = Matrix::Identity(2, 2);
  const Matrix x = Matrix::Ones(2, 3);
  const Matrix y = Matrix::Zero(3, 4);   // sigmoid -> all 0.5, recon all 1.5
  const Matrix input = Matrix::Zero(2, 4);
  Matrix s = Matrix::Zero(2, 4);
  CHECK(layer_loss(prefix, x, y, s, input, ActivationKind::Sigmoid, 10.0) ==
        doctest::Approx(90.0));  // 0.5 * 10 * (8 entries * 1.5^2)
  s(0, 0) = 2.0;  // adds (1/10)*2 to the penalty and changes the residual at one entry
  const double expected = 0.5 * 10.0 * (7 * 1.5 * 1.5 + 3.5 * 3.5) + 0.2;
  CHECK(layer_loss(prefix, x, y, s, input, ActivationKind::Sigmoid, 10.0) ==
        doctest::Approx(expected));
  CHECK_THROWS_AS(layer_loss(prefix, x, Matrix::Zero(2, 4), s, input, ActivationKind::Sigmoid,
                             10.0),
                  ShapeError);
}
