#pragma once
// Seeded generator of hierarchical ground-truth datasets. The construction
// mirrors the model the decomposer assumes:
//
//   deepest features   Y_deep: each row is a contiguous unit block; the
//                      blocks partition the columns exactly (disjoint)
//   intermediate level Y_k = X_{k+1} * sigmoid(Y_{k+1}) + lift, where the
//                      lift reinforces each row's parent block (so child
//                      components stay attributable to one parent) and
//                      adds the row's own sub-block with graded amplitude
//                      (so sibling components remain distinguishable)
//   input              I = X_1 * Y_1 + S_true + Gaussian noise
//
// X matrices are i.i.d. Gaussian scaled by 1/sqrt(rank). S_true places
// exactly floor(s_density * rows * cols) spikes of magnitude s_amplitude
// with seeded positions and signs. Everything is a pure function of the
// spec, so equal specs give bitwise-identical outputs.

#include <cstdint>
#include <vector>

#include "demand/matrix.hpp"

namespace demand {

struct SynthSpec {
  Eigen::Index rows = 100;
  Eigen::Index cols = 400;
  std::vector<int> ranks = {8, 3};  // strictly decreasing, ranks[0] < min(rows, cols)
  double noise_sigma = 0.01;
  double s_density = 0.02;   // fraction of entries carrying a background spike
  double s_amplitude = 1.0;  // spike magnitude
  std::uint64_t seed = 6;

  void validate() const;
};

// The factors the input was built from, for recovery scoring.
struct GroundTruth {
  std::vector<Matrix> x_list;  // x_list[0]: rows x ranks[0]; x_list[k]: ranks[k-1] x ranks[k]
  std::vector<Matrix> y_list;  // y_list[k]: ranks[k] x cols; y_list.back() is the block matrix
  Matrix s_true;
};

// Generate the input matrix and its ground truth from spec.
std::pair<Matrix, GroundTruth> generate(const SynthSpec& spec);

}  // namespace demand
