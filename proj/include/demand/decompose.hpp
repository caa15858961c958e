#pragma once
// The hierarchical decomposition loop. Layer k approximates the ORIGINAL
// input as  Phi_k X_k N(Y_k) + S_k  where Phi_k is the product of the
// earlier layers' weight matrices (identity for k = 1). The number of
// components r_k for each layer comes from the rank estimator applied to
// that layer's target: the input itself for k = 1, the activated features
// N(Y_{k-1}) for k >= 2. The loop stops when the estimated next rank is 1
// or the layer cap is reached.
//
// Per layer, optimization alternates: an Adam step on X_k, an Adam step
// on Y_k (gradient re-evaluated), then S_k = soft-threshold of the
// current reconstruction residual at 1/lambda. Sweeps stop when the
// relative loss change drops below rel_tol or at max_iters_per_layer.

#include <cstdint>
#include <vector>

#include "demand/activation.hpp"
#include "demand/matrix.hpp"
#include "demand/optimizer.hpp"
#include "demand/rank.hpp"

namespace demand {

// Settings for the error-reduction refinement pass (see mbp.hpp).
struct MbpConfig {
  bool enabled = false;
  double e0 = 0.01;   // initial step; iteration it moves by e0 / 2^it
  int max_iter = 20;
  bool guard = true;  // revert an iteration that increases reconstruction error

  void validate() const {
    if (!(e0 > 0.0)) throw ConfigError("mbp.e0 must be > 0");
    if (max_iter < 1) throw ConfigError("mbp.max_iter must be >= 1");
  }
};

struct DemandConfig {
  double lambda = 10.0;          // reconstruction weight; sparsity weight is 1/lambda
  int max_iters_per_layer = 500;
  double rel_tol = 1e-6;         // relative loss-change stopping threshold
  int max_layers = 10;
  ActivationKind activation = ActivationKind::Sigmoid;
  AdamParams adam;
  RankConfig rank;
  MbpConfig mbp;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lambda > 1.0)) throw ConfigError("lambda must be > 1");
    if (max_iters_per_layer < 1) throw ConfigError("max_iters_per_layer must be >= 1");
    if (!(rel_tol >= 0.0)) throw ConfigError("rel_tol must be >= 0");
    if (max_layers < 1) throw ConfigError("max_layers must be >= 1");
    if (!(adam.alpha > 0.0)) throw ConfigError("adam.alpha must be > 0");
    if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0)) throw ConfigError("adam.beta1 must be in (0,1)");
    if (!(adam.beta2 > 0.0 && adam.beta2 < 1.0)) throw ConfigError("adam.beta2 must be in (0,1)");
    if (!(adam.eps > 0.0)) throw ConfigError("adam.eps must be > 0");
    rank.validate();
    mbp.validate();
  }
};

// One layer's factors: x is (previous rank) x r_k (t x r_1 for the first
// layer), y is r_k x m stored PRE-activation (N is applied at use sites),
// s is the sparse background at the input's shape.
struct LayerFactors {
  Matrix x;
  Matrix y;
  Matrix s;
  int rank = 0;
};

struct DecompositionResult {
  std::vector<LayerFactors> layers;
  std::vector<std::vector<double>> loss_history;  // one sequence per layer
  DemandConfig config;
  std::uint64_t seed = 0;
  bool max_layers_hit = false;  // true when the loop ended at the cap
  int final_next_rank = 1;      // rank estimate that ended the loop
};

// Run the full decomposition of input under cfg.
DecompositionResult decompose(const Matrix& input, const DemandConfig& cfg);

// (X_1 ... X_depth) N(Y_depth) + S_depth; depth is 1-based.
Matrix reconstruct(const DecompositionResult& result, int depth);

}  // namespace demand
