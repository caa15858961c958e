#include "demand/mbp.hpp"

#include <cmath>
#include <string>

namespace demand {

namespace {

void check_chain(const std::vector<LayerFactors>& layers, const Matrix& input) {
  Eigen::Index prev_cols = input.rows();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const LayerFactors& l = layers[k];
    if (l.x.rows() != prev_cols || l.y.rows() != l.x.cols() || l.y.cols() != input.cols() ||
        l.s.rows() != input.rows() || l.s.cols() != input.cols()) {
      throw ShapeError("backpropagate: layer " + std::to_string(k + 1) +
                       " breaks the shape chain (x " + shape_str(l.x) + ", y " + shape_str(l.y) +
                       ", s " + shape_str(l.s) + " against input " + shape_str(input) + ")");
    }
    prev_cols = l.x.cols();
  }
}

// ||X_1 ... X_M N(Y_M) + S_M - input||_F
double deepest_error(const std::vector<LayerFactors>& layers, const Matrix& input,
                     ActivationKind kind) {
  Matrix product = layers.front().x;
  for (std::size_t k = 1; k < layers.size(); ++k) product = product * layers[k].x;
  const LayerFactors& deepest = layers.back();
  return (product * apply(kind, deepest.y) + deepest.s - input).norm();
}

}  // namespace

std::vector<LayerFactors> backpropagate(const std::vector<LayerFactors>& layers,
                                        const Matrix& input, const MbpConfig& cfg,
                                        ActivationKind kind, std::vector<double>* errors_out) {
  if (layers.empty()) {
    throw ShapeError("backpropagate: layer list must be nonempty");
  }
  check_chain(layers, input);
  if (errors_out) errors_out->clear();

  std::vector<LayerFactors> current = layers;
  if (layers.size() == 1 || cfg.e0 == 0.0) {
    return current;  // nothing upstream to correct / zero step size
  }

  double best_error = deepest_error(current, input, kind);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const double step = cfg.e0 / std::pow(2.0, static_cast<double>(it));
    const std::vector<LayerFactors> snapshot = current;

    Matrix prefix = Matrix::Identity(input.rows(), input.rows());
    double mu = 1.0;
    for (LayerFactors& layer : current) {
      const Matrix k_target = prefix.transpose() * input;
      const Matrix p = layer.x * layer.x.transpose() * mu;
      const Matrix pre = clamp_to_domain(kind, layer.x * apply(kind, layer.y));
      const Matrix coeff = max_abs_entry(layer.x) * inverse_derivative(kind, pre);
      const Matrix core = (p * inverse(kind, pre) - k_target).cwiseProduct(coeff);
      const Matrix ny = apply(kind, layer.y);

      // Both updates use this layer's pre-update factors; the prefix for
      // deeper layers then carries the just-updated weights.
      const Matrix new_y = layer.y - step * (layer.x.transpose() * core);
      const Matrix new_x = layer.x - step * (core * ny.transpose());
      layer.x = new_x;
      layer.y = new_y;
      prefix = prefix * layer.x;
      mu *= max_abs_entry(layer.x);
    }

    const double error = deepest_error(current, input, kind);
    if (cfg.guard && error > best_error) {
      current = snapshot;
      if (errors_out) errors_out->push_back(best_error);
    } else {
      best_error = error;
      if (errors_out) errors_out->push_back(error);
    }
  }
  return current;
}

}  // namespace demand
