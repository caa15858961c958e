#include "demand/synth.hpp"

#include <cmath>
#include <string>

#include "demand/activation.hpp"
#include "demand/rng.hpp"

namespace demand {

namespace {

// Lift amplitudes. The block term (kLiftBlock) re-activates each row's
// parent block so level-1 components inherit their parent's footprint;
// the bump term (kLiftBump) marks each row's own sub-block; the grading
// tilts bump amplitudes across rows so no two rows are exchangeable.
constexpr double kLiftBump = 1.8;
constexpr double kLiftBlock = 3.8;
constexpr double kLiftGrade = 0.5;

}  // namespace

void SynthSpec::validate() const {
  if (rows < 1 || cols < 1) {
    throw ParameterError("SynthSpec: rows and cols must be >= 1");
  }
  if (ranks.empty()) {
    throw ParameterError("SynthSpec: ranks must be nonempty");
  }
  for (std::size_t k = 0; k < ranks.size(); ++k) {
    if (ranks[k] < 1) {
      throw ParameterError("SynthSpec: ranks must be positive");
    }
    if (k > 0 && ranks[k] >= ranks[k - 1]) {
      throw ParameterError("SynthSpec: ranks must be strictly decreasing");
    }
  }
  if (ranks.front() >= std::min(rows, cols)) {
    throw ParameterError("SynthSpec: ranks[0] must be < min(rows, cols)");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ParameterError("SynthSpec: noise_sigma must be finite and >= 0");
  }
  if (!(s_density >= 0.0 && s_density < 1.0)) {
    throw ParameterError("SynthSpec: s_density must be in [0, 1)");
  }
  if (!(s_amplitude >= 0.0) || !std::isfinite(s_amplitude)) {
    throw ParameterError("SynthSpec: s_amplitude must be finite and >= 0");
  }
}

std::pair<Matrix, GroundTruth> generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Eigen::Index t = spec.rows;
  const Eigen::Index m = spec.cols;
  const int levels = static_cast<int>(spec.ranks.size());

  GroundTruth truth;
  truth.x_list.resize(static_cast<std::size_t>(levels));
  truth.y_list.resize(static_cast<std::size_t>(levels));

  // Deepest level: unit blocks partitioning [0, m).
  const int r_deep = spec.ranks.back();
  Matrix y_deep = Matrix::Zero(r_deep, m);
  for (int i = 0; i < r_deep; ++i) {
    const Eigen::Index lo = static_cast<Eigen::Index>(i) * m / r_deep;
    const Eigen::Index hi = static_cast<Eigen::Index>(i + 1) * m / r_deep;
    y_deep.block(i, lo, 1, hi - lo).setOnes();
  }
  truth.y_list[static_cast<std::size_t>(levels - 1)] = std::move(y_deep);

  // Intermediate levels, deepest first.
  for (int k = levels - 2; k >= 0; --k) {
    const int rk = spec.ranks[static_cast<std::size_t>(k)];
    const int rk1 = spec.ranks[static_cast<std::size_t>(k + 1)];
    Matrix xk1(rk, rk1);
    rng.fill_gaussian(xk1, 1.0 / std::sqrt(static_cast<double>(rk1)));
    truth.x_list[static_cast<std::size_t>(k + 1)] = xk1;

    Matrix yk = xk1 * apply(ActivationKind::Sigmoid, truth.y_list[static_cast<std::size_t>(k + 1)]);
    for (int i = 0; i < rk; ++i) {
      const int group = i * rk1 / rk;
      const Eigen::Index glo = static_cast<Eigen::Index>(group) * m / rk1;
      const Eigen::Index ghi = static_cast<Eigen::Index>(group + 1) * m / rk1;
      // This row's slot among the rows sharing the same parent group.
      int members = 0;
      int slot = 0;
      for (int j = 0; j < rk; ++j) {
        if (j * rk1 / rk == group) {
          if (j == i) slot = members;
          ++members;
        }
      }
      const Eigen::Index blo = glo + static_cast<Eigen::Index>(slot) * (ghi - glo) / members;
      const Eigen::Index bhi = glo + static_cast<Eigen::Index>(slot + 1) * (ghi - glo) / members;
      const double amp =
          kLiftBump * (1.0 + kLiftGrade * static_cast<double>(i) / std::max(rk - 1, 1));
      yk.block(i, blo, 1, bhi - blo).array() += amp;
      yk.block(i, glo, 1, ghi - glo).array() += kLiftBlock;
    }
    truth.y_list[static_cast<std::size_t>(k)] = std::move(yk);
  }

  Matrix x0(t, spec.ranks.front());
  rng.fill_gaussian(x0, 1.0 / std::sqrt(static_cast<double>(spec.ranks.front())));
  truth.x_list[0] = std::move(x0);

  truth.s_true = Matrix::Zero(t, m);
  const auto n_spikes = static_cast<std::size_t>(
      std::floor(spec.s_density * static_cast<double>(t) * static_cast<double>(m)));
  const std::vector<std::size_t> positions =
      rng.sample_without_replacement(static_cast<std::size_t>(t * m), n_spikes);
  for (const std::size_t pos : positions) {
    const Eigen::Index row = static_cast<Eigen::Index>(pos) / m;
    const Eigen::Index col = static_cast<Eigen::Index>(pos) % m;
    truth.s_true(row, col) = rng.uniform01() < 0.5 ? -spec.s_amplitude : spec.s_amplitude;
  }

  Matrix noise = Matrix::Zero(t, m);
  if (spec.noise_sigma > 0.0) {
    rng.fill_gaussian(noise, spec.noise_sigma);
  }
  Matrix input = truth.x_list[0] * truth.y_list[0] + truth.s_true + noise;
  return {std::move(input), std::move(truth)};
}

}  // namespace demand
