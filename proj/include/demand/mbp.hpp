#pragma once
// Post-optimization refinement pass over a stack of layers. Each
// iteration it = 1..max_iter walks the layers in order and nudges X_k and
// Y_k along a correction direction with a geometrically decaying step
// e0 / 2^it, so total movement is bounded. With the guard enabled, an
// iteration that increases the deepest reconstruction error is reverted,
// making the error non-increasing across the pass.

#include <vector>

#include "demand/decompose.hpp"

namespace demand {

// Refine the layer stack against the original input. For a single layer
// (no earlier factors to accumulate error through) this is a no-op, as it
// is for e0 = 0. If errors_out is non-null it receives the deepest-layer
// reconstruction error after each iteration (after any revert).
std::vector<LayerFactors> backpropagate(const std::vector<LayerFactors>& layers,
                                        const Matrix& input, const MbpConfig& cfg,
                                        ActivationKind kind,
                                        std::vector<double>* errors_out = nullptr);

}  // namespace demand
