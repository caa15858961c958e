// Acceptance gate: ten end-to-end checks of the library's core guarantees,
// one pass/fail line each, nonzero exit if any check fails. Each check
// also carries a wall-clock budget; exceeding it is a failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "demand/decompose.hpp"
#include "demand/evaluate.hpp"
#include "demand/io.hpp"
#include "demand/mbp.hpp"
#include "demand/rng.hpp"
#include "demand/synth.hpp"

using namespace demand;

namespace {

std::string g_detail;  // set by a check to annotate its FAIL line

// Shared instance for the generated-data checks: one default dataset and
// one full decomposition of it under the documented evaluation settings.
struct SharedRun {
  Matrix input;
  GroundTruth truth;
  DecompositionResult result;
};

DemandConfig eval_config() {
  DemandConfig cfg;
  cfg.adam.alpha = 0.01;
  cfg.max_iters_per_layer = 600;
  cfg.rank.min_rank = 3;
  cfg.seed = 0;
  return cfg;
}

const SharedRun& shared_run() {
  static const SharedRun run = [] {
    SharedRun r;
    SynthSpec spec;  // library defaults
    auto [input, truth] = generate(spec);
    r.input = std::move(input);
    r.truth = std::move(truth);
    r.result = decompose(r.input, eval_config());
    return r;
  }();
  return run;
}

std::size_t argmax_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// --- criterion bodies ------------------------------------------------

bool check_gradients() {
  Rng rng(51);
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index t = 2 + static_cast<Eigen::Index>(rng.bounded(7));   // <= 8
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.bounded(6));   // <= 6
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng.bounded(6));   // <= 6
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.bounded(9));   // <= 10
    const ActivationKind kind = trial % 2 == 0 ? ActivationKind::Sigmoid
                                               : ActivationKind::Identity;
    const double lambda = trial % 3 == 0 ? 2.5 : 10.0;
    Matrix prefix(t, p), x(p, r), y(r, m), input(t, m), raw(t, m);
    rng.fill_gaussian(prefix);
    rng.fill_gaussian(x);
    rng.fill_gaussian(y);
    rng.fill_gaussian(input);
    rng.fill_gaussian(raw);
    const Matrix s = shrinkage(raw, 0.8);

    const auto [gx, gy] = grad_layer(prefix, x, y, s, input, kind, lambda);
    const auto fd = [&](Matrix& var, Eigen::Index i, Eigen::Index j) {
      const double saved = var(i, j);
      var(i, j) = saved + h;
      const double up = layer_loss(prefix, x, y, s, input, kind, lambda);
      var(i, j) = saved - h;
      const double down = layer_loss(prefix, x, y, s, input, kind, lambda);
      var(i, j) = saved;
      return (up - down) / (2.0 * h);
    };
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double f = fd(x, i, j);
        worst = std::max(worst, std::abs(gx(i, j) - f) /
                                    std::max({1.0, std::abs(f), std::abs(gx(i, j))}));
      }
    }
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      for (Eigen::Index j = 0; j < y.cols(); ++j) {
        const double f = fd(y, i, j);
        worst = std::max(worst, std::abs(gy(i, j) - f) /
                                    std::max({1.0, std::abs(f), std::abs(gy(i, j))}));
      }
    }
  }
  g_detail = "worst relative error " + std::to_string(worst);
  return worst <= 1e-4;
}

bool check_shrinkage_contraction() {
  Rng rng(52);
  for (int trial = 0; trial < 1000; ++trial) {
    Matrix m(1 + static_cast<Eigen::Index>(rng.bounded(6)),
             1 + static_cast<Eigen::Index>(rng.bounded(6)));
    rng.fill_gaussian(m);
    const double tau = rng.uniform01_open();
    if (!(frobenius_norm(shrinkage(m, tau)) < frobenius_norm(m))) {
      g_detail = "trial " + std::to_string(trial) + " did not contract";
      return false;
    }
  }
  return true;
}

bool check_rank_bounds() {
  Rng rng(53);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index rows = 2 + static_cast<Eigen::Index>(rng.bounded(19));
    const Eigen::Index cols = 2 + static_cast<Eigen::Index>(rng.bounded(19));
    Matrix m(rows, cols);
    rng.fill_gaussian(m);
    const int est = estimate_rank(m).est;
    const int cap = static_cast<int>(std::min(rows, cols)) - 1;
    if (est < 1 || est > cap) {
      g_detail = "trial " + std::to_string(trial) + ": est " + std::to_string(est) +
                 " outside [1, " + std::to_string(cap) + "]";
      return false;
    }
  }
  return true;
}

bool check_rank_recovery() {
  int exact = 0;
  int near = 0;
  for (int s = 0; s < 100; ++s) {
    Rng rng(static_cast<std::uint64_t>(s));
    const int r = 2 + s % 5;
    const Eigen::Index rows = 10 + static_cast<Eigen::Index>(rng.bounded(11));
    const Eigen::Index cols = 10 + static_cast<Eigen::Index>(rng.bounded(11));
    Matrix a(rows, r), b(r, cols);
    rng.fill_gaussian(a);
    rng.fill_gaussian(b);
    const Matrix clean = a * b;
    exact += estimate_rank(clean).est == r;
    Matrix noise(rows, cols);
    rng.fill_gaussian(noise, 1e-6);
    near += std::abs(estimate_rank(Matrix(clean + noise)).est - r) <= 1;
  }
  g_detail = "exact " + std::to_string(exact) + "/100, noisy-within-1 " + std::to_string(near) +
             "/100";
  return exact >= 90 && near >= 90;
}

bool check_single_layer_fit() {
  Rng data(1003);
  Matrix x(60, 4), y(4, 80);
  data.fill_uniform(x, 0.5);
  data.fill_uniform(y, 0.5);
  const Matrix input = x * apply(ActivationKind::Sigmoid, y);

  const int est = estimate_rank(input).est;
  DemandConfig cfg;
  cfg.adam.alpha = 0.01;
  cfg.max_iters_per_layer = 500;
  cfg.rel_tol = 1e-12;
  cfg.max_layers = 1;
  cfg.seed = 3;
  const DecompositionResult res = decompose(input, cfg);
  const double loss = res.loss_history.front().back();
  const double budget = 1e-3 * input.squaredNorm();
  g_detail = "est " + std::to_string(est) + ", loss " + std::to_string(loss) + " vs budget " +
             std::to_string(budget);
  return est == 4 && loss <= budget;
}

bool check_hierarchical_fit() {
  const SharedRun& run = shared_run();
  const DecompositionResult& res = run.result;
  std::string ranks;
  for (const LayerFactors& l : res.layers) {
    ranks += (ranks.empty() ? "" : ",") + std::to_string(l.rank);
  }
  const ComponentSet fitted{apply(ActivationKind::Sigmoid, res.layers.front().y), {}};
  const ComponentSet truth{run.truth.y_list.front(), {}};
  const double match = match_components(fitted, truth).mean_abs_corr;
  g_detail = "ranks " + ranks + ", matched correlation " + std::to_string(match);
  return res.layers.size() >= 2 && std::abs(res.layers.back().rank - 3) <= 1 && match >= 0.8;
}

bool check_refinement() {
  const SharedRun& run = shared_run();
  const int depth = static_cast<int>(run.result.layers.size());
  const double before = (reconstruct(run.result, depth) - run.input).norm();
  const MbpConfig mbp;  // defaults: e0 = 0.01, 20 iterations, guard on
  const std::vector<LayerFactors> refined =
      backpropagate(run.result.layers, run.input, mbp, ActivationKind::Sigmoid);
  Matrix product = refined.front().x;
  for (std::size_t k = 1; k < refined.size(); ++k) product = product * refined[k].x;
  const double after =
      (product * apply(ActivationKind::Sigmoid, refined.back().y) + refined.back().s - run.input)
          .norm();
  g_detail = "error " + std::to_string(before) + " -> " + std::to_string(after);
  return after <= before;
}

bool check_reproducibility() {
  const SharedRun& run = shared_run();
  const ReproducibilityReport rep = reproducibility(run.input, eval_config(), /*split_seed=*/0);

  std::vector<bool> seen(static_cast<std::size_t>(run.input.rows()), false);
  for (const Eigen::Index i : rep.half_a_rows) seen[static_cast<std::size_t>(i)] = true;
  for (const Eigen::Index i : rep.half_b_rows) {
    if (seen[static_cast<std::size_t>(i)]) {
      g_detail = "halves overlap at row " + std::to_string(i);
      return false;
    }
    seen[static_cast<std::size_t>(i)] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      g_detail = "row " + std::to_string(i) + " in neither half";
      return false;
    }
  }
  g_detail = "matched correlation " + std::to_string(rep.mean_abs_corr) + " over " +
             std::to_string(rep.match.pairs.size()) + " pairs";
  return rep.mean_abs_corr >= 0.8;
}

bool check_ratio_argmax() {
  Rng rng(54);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 2 + rng.bounded(12);
    std::vector<double> d(len);
    for (double& v : d) v = rng.uniform01_open() * 10.0;
    std::sort(d.begin(), d.end(), std::greater<double>());

    const RankConfig cfg;
    std::vector<double> raw(len - 1);
    for (std::size_t p = 0; p + 1 < len; ++p) {
      raw[p] = d[p] / std::max(d[p + 1], cfg.eps_denom);
    }
    if (argmax_lowest(raw) != argmax_lowest(weighted_ratio(d, cfg))) {
      g_detail = "trial " + std::to_string(trial) + ": normalization moved the argmax";
      return false;
    }
  }
  return true;
}

bool check_cli_determinism() {
  const char* cli = std::getenv("DEMAND_CLI");
  if (!cli) {
    g_detail = "DEMAND_CLI is not set";
    return false;
  }
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("demand_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);

  Rng rng(55);
  Matrix x(14, 3), y(3, 18);
  rng.fill_gaussian(x);
  rng.fill_gaussian(y);
  write_matrix((dir / "input.csv").string(),
               Matrix(x * apply(ActivationKind::Sigmoid, y)));

  const auto shell = [](const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return status != -1 && WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  for (const char* sub : {"run1", "run2"}) {
    const int rc = shell(std::string(cli) + " decompose --input " + (dir / "input.csv").string() +
                         " --out " + (dir / sub).string() + " > /dev/null 2>&1");
    if (rc != 0) {
      g_detail = std::string("decompose into ") + sub + " exited " + std::to_string(rc);
      return false;
    }
  }
  const int diff = shell("diff -r " + (dir / "run1").string() + " " + (dir / "run2").string() +
                         " > /dev/null 2>&1");
  if (diff != 0) {
    g_detail = "output directories differ";
    return false;
  }
  fs::remove_all(dir);
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    const char* description;
    double budget_seconds;
    std::function<bool()> check;
  };
  const std::vector<Criterion> criteria = {
      {"analytic layer gradients match central finite differences to 1e-4 "
       "(20 random instances)",
       5.0, check_gradients},
      {"soft-threshold strictly contracts every nonzero matrix (1000 random cases)", 1.0,
       check_shrinkage_contraction},
      {"rank estimate always lies in [1, min(dim)-1] (500 random matrices)", 10.0,
       check_rank_bounds},
      {"planted rank recovered exactly on >= 90/100 products and within +-1 under 1e-6 noise",
       10.0, check_rank_recovery},
      {"single-layer fit finds the true component count and reaches 0.1% relative loss", 30.0,
       check_single_layer_fit},
      {"generated-data fit: >= 2 layers, deepest rank within +-1 of 3, matched correlation "
       ">= 0.8",
       120.0, check_hierarchical_fit},
      {"refinement pass never increases the deepest reconstruction error", 30.0,
       check_refinement},
      {"split-half reproducibility: disjoint covering halves, matched correlation >= 0.8",
       180.0, check_reproducibility},
      {"ratio-statistic normalization never moves the winning position (1000 sequences)", 1.0,
       check_ratio_argmax},
      {"command-line decompose runs are byte-for-byte identical", 60.0, check_cli_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    g_detail.clear();
    bool ok = false;
    std::string thrown;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ok = criteria[i].check();
    } catch (const std::exception& e) {
      thrown = e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > criteria[i].budget_seconds) ok = false;
    if (!ok) ++failures;
    std::printf("[%s] criterion %zu: %s (%.2fs)", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].description, secs);
    if (!ok && !thrown.empty()) {
      std::printf(" -- threw: %s", thrown.c_str());
    } else if (!ok && !g_detail.empty()) {
      std::printf(" -- %s", g_detail.c_str());
    }
    std::printf("\n");
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
