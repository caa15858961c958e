#include "demand/decompose.hpp"

#include <cmath>
#include <utility>

#include "demand/mbp.hpp"
#include "demand/rng.hpp"

namespace demand {

namespace {

// Fit one layer against the original input with the accumulated prefix
// held fixed. Returns the fitted factors and the per-sweep loss values.
std::pair<LayerFactors, std::vector<double>> fit_layer(const Matrix& input, const Matrix& prefix,
                                                       int rank, const DemandConfig& cfg,
                                                       Rng& rng) {
  const double lambda = cfg.lambda;
  const ActivationKind kind = cfg.activation;
  const double init_scale = 1.0 / std::sqrt(static_cast<double>(rank));

  LayerFactors layer;
  layer.rank = rank;
  layer.x = Matrix(prefix.cols(), rank);
  layer.y = Matrix(rank, input.cols());
  rng.fill_uniform(layer.x, init_scale);
  rng.fill_uniform(layer.y, init_scale);
  layer.s = Matrix::Zero(input.rows(), input.cols());

  AdamState st_x(layer.x.rows(), layer.x.cols(), cfg.adam);
  AdamState st_y(layer.y.rows(), layer.y.cols(), cfg.adam);

  std::vector<double> losses;
  losses.reserve(static_cast<std::size_t>(cfg.max_iters_per_layer));
  double prev = 0.0;
  bool have_prev = false;
  for (int it = 0; it < cfg.max_iters_per_layer; ++it) {
    const Matrix ny = apply(kind, layer.y);
    {
      const Matrix err = prefix * layer.x * ny - (input - layer.s);
      const Matrix gx = lambda * (prefix.transpose() * err * ny.transpose());
      layer.x = adam_step(st_x, layer.x, gx);
    }
    {
      const Matrix px = prefix * layer.x;
      const Matrix err = px * ny - (input - layer.s);
      const Matrix gy = (lambda * (px.transpose() * err)).cwiseProduct(derivative(kind, layer.y));
      layer.y = adam_step(st_y, layer.y, gy);
    }
    layer.s = shrinkage(prefix * layer.x * apply(kind, layer.y) - input, 1.0 / lambda);
    const double loss = layer_loss(prefix, layer.x, layer.y, layer.s, input, kind, lambda);
    losses.push_back(loss);
    if (have_prev && std::abs(prev - loss) <= cfg.rel_tol * std::max(std::abs(prev), 1e-300)) {
      break;
    }
    prev = loss;
    have_prev = true;
  }
  return {std::move(layer), std::move(losses)};
}

// A 1x1 input needs no optimization: x = [[1]] and y = N^{-1}(input)
// reproduce the (domain-clamped) value exactly.
DecompositionResult trivial_scalar_result(const Matrix& input, const DemandConfig& cfg) {
  DecompositionResult res;
  res.config = cfg;
  res.seed = cfg.seed;
  LayerFactors layer;
  layer.rank = 1;
  layer.x = Matrix::Ones(1, 1);
  layer.y = inverse(cfg.activation, input);
  layer.s = Matrix::Zero(1, 1);
  const double loss = layer_loss(Matrix::Identity(1, 1), layer.x, layer.y, layer.s, input,
                                 cfg.activation, cfg.lambda);
  res.layers.push_back(std::move(layer));
  res.loss_history.push_back({loss});
  res.final_next_rank = 1;
  return res;
}

// An all-zero input is represented exactly by one zero layer (the zero
// weight matrix nulls the activated features), with loss exactly 0.
DecompositionResult trivial_zero_result(const Matrix& input, const DemandConfig& cfg) {
  DecompositionResult res;
  res.config = cfg;
  res.seed = cfg.seed;
  LayerFactors layer;
  layer.rank = 1;
  layer.x = Matrix::Zero(input.rows(), 1);
  layer.y = Matrix::Zero(1, input.cols());
  layer.s = Matrix::Zero(input.rows(), input.cols());
  res.layers.push_back(std::move(layer));
  res.loss_history.push_back({0.0});
  res.final_next_rank = 1;
  return res;
}

}  // namespace

DecompositionResult decompose(const Matrix& input, const DemandConfig& cfg) {
  cfg.validate();
  if (input.rows() < 1 || input.cols() < 1) {
    throw InputError("decompose: input must be nonempty");
  }
  require_finite(input, "decompose");

  if (input.rows() == 1 && input.cols() == 1) return trivial_scalar_result(input, cfg);
  if ((input.array() == 0.0).all()) return trivial_zero_result(input, cfg);

  DecompositionResult res;
  res.config = cfg;
  res.seed = cfg.seed;

  Rng rng(cfg.seed);
  Matrix prefix = Matrix::Identity(input.rows(), input.rows());
  int rank = estimate_rank(input, cfg.rank).est;
  for (int k = 0; k < cfg.max_layers; ++k) {
    auto [layer, losses] = fit_layer(input, prefix, rank, cfg, rng);
    prefix = prefix * layer.x;
    const Matrix next_target = apply(cfg.activation, layer.y);
    res.layers.push_back(std::move(layer));
    res.loss_history.push_back(std::move(losses));

    rank = estimate_rank(next_target, cfg.rank).est;
    res.final_next_rank = rank;
    if (rank == 1) break;
    if (k == cfg.max_layers - 1) res.max_layers_hit = true;
  }

  if (cfg.mbp.enabled) {
    res.layers = backpropagate(res.layers, input, cfg.mbp, cfg.activation);
  }
  return res;
}

Matrix reconstruct(const DecompositionResult& result, int depth) {
  const int layer_count = static_cast<int>(result.layers.size());
  if (depth < 1 || depth > layer_count) {
    throw ParameterError("reconstruct: depth " + std::to_string(depth) + " outside 1.." +
                         std::to_string(layer_count));
  }
  Matrix product = result.layers[0].x;
  for (int k = 1; k < depth; ++k) {
    product = product * result.layers[static_cast<std::size_t>(k)].x;
  }
  const LayerFactors& deepest = result.layers[static_cast<std::size_t>(depth - 1)];
  return product * apply(result.config.activation, deepest.y) + deepest.s;
}

}  // namespace demand
