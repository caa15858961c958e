// demand: hierarchical sparse matrix decomposition from the command line.
//
// Subcommands:
//   decompose  factor a matrix file into stacked layers, write factors +
//              loss history + a JSON run manifest into --out
//   rank       print the estimated component count and the three
//              estimator votes for a matrix file, as CSV on stdout
//   synth      generate a seeded synthetic dataset (input + ground truth)
//   evaluate   greedy-match two runs' component maps, emit a pairing CSV
//   reproduce  split-half reproducibility protocol, emit a report CSV
//
// Exit codes: 0 success, 2 unreadable/malformed input data or bad command
// line, 3 invalid configuration or generator spec.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "demand/decompose.hpp"
#include "demand/evaluate.hpp"
#include "demand/io.hpp"
#include "demand/synth.hpp"
#include "json.hpp"

namespace {

using demand::ComponentSet;
using demand::DemandConfig;
using demand::Matrix;

namespace fs = std::filesystem;

DemandConfig load_config(const std::string& path) {
  if (path.empty()) return DemandConfig{};
  return demand::parse_config_json(demand::read_text_file(path));
}

std::string layer_file(const std::string& dir, const char* prefix, std::size_t k) {
  return dir + "/" + prefix + "_" + std::to_string(k + 1) + ".csv";
}

int cmd_decompose(const std::string& input_path, const std::string& config_path,
                  const std::string& out_dir) {
  const DemandConfig cfg = load_config(config_path);
  const Matrix input = demand::read_matrix(input_path);
  const demand::DecompositionResult result = demand::decompose(input, cfg);

  fs::create_directories(out_dir);
  std::vector<int> ranks;
  for (std::size_t k = 0; k < result.layers.size(); ++k) {
    const demand::LayerFactors& layer = result.layers[k];
    demand::write_matrix(layer_file(out_dir, "X", k), layer.x);
    demand::write_matrix(layer_file(out_dir, "Y", k), layer.y);
    demand::write_matrix(layer_file(out_dir, "S", k), layer.s);
    ranks.push_back(layer.rank);
  }

  std::string losses = "layer,sweep,loss\n";
  for (std::size_t k = 0; k < result.loss_history.size(); ++k) {
    for (std::size_t i = 0; i < result.loss_history[k].size(); ++i) {
      losses += std::to_string(k + 1) + "," + std::to_string(i + 1) + "," +
                demand::format_double(result.loss_history[k][i]) + "\n";
    }
  }
  std::ofstream loss_file(out_dir + "/loss_history.csv", std::ios::trunc);
  if (!loss_file) throw demand::InputError(out_dir + "/loss_history.csv: cannot open for writing");
  loss_file << losses;

  nlohmann::json manifest;
  manifest["config"] = nlohmann::json::parse(demand::config_to_json(result.config));
  manifest["layers"] = result.layers.size();
  manifest["ranks"] = ranks;
  manifest["seed"] = result.seed;
  manifest["final_next_rank"] = result.final_next_rank;
  manifest["max_layers_hit"] = result.max_layers_hit;
  std::ofstream manifest_file(out_dir + "/manifest.json", std::ios::trunc);
  if (!manifest_file) throw demand::InputError(out_dir + "/manifest.json: cannot open for writing");
  manifest_file << manifest.dump(2) << "\n";
  return 0;
}

int cmd_rank(const std::string& input_path) {
  const Matrix input = demand::read_matrix(input_path);
  const demand::RankEstimate est = demand::estimate_rank(input);
  std::cout << "est,wr_pos,wd_pos,wc_pos\n"
            << est.est << "," << est.wr_pos << "," << est.wd_pos << "," << est.wc_pos << "\n";
  return 0;
}

int cmd_synth(const demand::SynthSpec& spec, const std::string& out_dir) {
  const auto [input, truth] = demand::generate(spec);
  fs::create_directories(out_dir);
  demand::write_matrix(out_dir + "/input.csv", input);
  demand::write_matrix(out_dir + "/S_true.csv", truth.s_true);
  for (std::size_t k = 0; k < truth.x_list.size(); ++k) {
    demand::write_matrix(layer_file(out_dir, "X_true", k), truth.x_list[k]);
    demand::write_matrix(layer_file(out_dir, "Y_true", k), truth.y_list[k]);
  }
  std::ofstream spec_file(out_dir + "/spec.json", std::ios::trunc);
  if (!spec_file) throw demand::InputError(out_dir + "/spec.json: cannot open for writing");
  spec_file << demand::synth_spec_to_json(spec);
  return 0;
}

// Component maps of a directory: a decomposition run (manifest.json +
// Y_1.csv, maps are the activated rows) or a synthetic-truth directory
// (Y_true_1.csv, maps are the raw rows).
ComponentSet load_component_set(const std::string& dir) {
  if (fs::exists(dir + "/manifest.json")) {
    const nlohmann::json manifest =
        nlohmann::json::parse(demand::read_text_file(dir + "/manifest.json"), nullptr, false);
    if (manifest.is_discarded() || !manifest.contains("config")) {
      throw demand::InputError(dir + "/manifest.json: malformed run manifest");
    }
    const DemandConfig cfg = demand::parse_config_json(manifest["config"].dump());
    const Matrix y1 = demand::read_matrix(dir + "/Y_1.csv");
    return ComponentSet{demand::apply(cfg.activation, y1), {}};
  }
  if (fs::exists(dir + "/Y_true_1.csv")) {
    return ComponentSet{demand::read_matrix(dir + "/Y_true_1.csv"), {}};
  }
  throw demand::InputError(dir + ": no manifest.json or Y_true_1.csv; not a run directory");
}

int cmd_evaluate(const std::string& dir_a, const std::string& dir_b, const std::string& metric) {
  const ComponentSet a = load_component_set(dir_a);
  const ComponentSet b = load_component_set(dir_b);
  const demand::MatchResult match = demand::match_components(a, b);

  std::cout << "pair_index,a_row,b_row," << metric << "\n";
  double total = 0.0;
  for (std::size_t p = 0; p < match.pairs.size(); ++p) {
    const demand::MatchedPair& pair = match.pairs[p];
    double value = pair.abs_corr;
    if (metric == "hausdorff") {
      value = demand::hausdorff(a.maps.row(pair.a_row).transpose(),
                                b.maps.row(pair.b_row).transpose());
    }
    total += value;
    std::cout << p + 1 << "," << pair.a_row + 1 << "," << pair.b_row + 1 << ","
              << demand::format_double(value) << "\n";
  }
  const double mean = match.pairs.empty() ? 0.0 : total / static_cast<double>(match.pairs.size());
  std::cout << "# mean_" << metric << " = " << demand::format_double(mean) << "\n";
  return 0;
}

int cmd_reproduce(const std::string& input_path, const std::string& config_path,
                  std::uint64_t split_seed) {
  const DemandConfig cfg = load_config(config_path);
  const Matrix input = demand::read_matrix(input_path);
  const demand::ReproducibilityReport report = demand::reproducibility(input, cfg, split_seed);

  std::cout << "pair_index,corr,hausdorff\n";
  for (std::size_t p = 0; p < report.match.pairs.size(); ++p) {
    std::cout << p + 1 << "," << demand::format_double(report.match.pairs[p].abs_corr) << ","
              << demand::format_double(report.pair_hausdorff[p]) << "\n";
  }
  std::cout << "# mean_abs_corr = " << demand::format_double(report.mean_abs_corr) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical sparse approximately-nonlinear matrix decomposition"};
  app.require_subcommand(1);

  std::string input_path;
  std::string config_path;
  std::string out_dir;
  std::string dir_a;
  std::string dir_b;
  std::string metric = "corr";
  std::string spec_path;
  std::uint64_t split_seed = 0;

  demand::SynthSpec flag_spec;
  std::vector<int> flag_ranks;

  CLI::App* decompose = app.add_subcommand("decompose", "Factor a matrix into stacked layers");
  decompose->add_option("--input", input_path, "Input matrix (.csv or .dmnd)")->required();
  decompose->add_option("--config", config_path, "JSON configuration file");
  decompose->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* rank = app.add_subcommand("rank", "Estimate the component count of a matrix");
  rank->add_option("--input", input_path, "Input matrix (.csv or .dmnd)")->required();

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
  CLI::Option* spec_opt = synth->add_option("--spec", spec_path, "JSON generator spec");
  synth->add_option("--out", out_dir, "Output directory")->required();
  synth->add_option("--rows", flag_spec.rows, "Input rows")->excludes(spec_opt);
  synth->add_option("--cols", flag_spec.cols, "Input columns")->excludes(spec_opt);
  synth->add_option("--ranks", flag_ranks, "Per-level component counts, e.g. 8,3")
      ->delimiter(',')
      ->excludes(spec_opt);
  synth->add_option("--noise-sigma", flag_spec.noise_sigma, "Gaussian noise level")
      ->excludes(spec_opt);
  synth->add_option("--s-density", flag_spec.s_density, "Background spike fraction")
      ->excludes(spec_opt);
  synth->add_option("--s-amplitude", flag_spec.s_amplitude, "Background spike magnitude")
      ->excludes(spec_opt);
  synth->add_option("--seed", flag_spec.seed, "Generator seed")->excludes(spec_opt);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Match two runs' component maps");
  evaluate->add_option("--a", dir_a, "First run directory")->required();
  evaluate->add_option("--b", dir_b, "Second run directory")->required();
  evaluate->add_option("--metric", metric, "corr or hausdorff")
      ->check(CLI::IsMember({"corr", "hausdorff"}));

  CLI::App* reproduce = app.add_subcommand("reproduce", "Split-half reproducibility report");
  reproduce->add_option("--input", input_path, "Input matrix (.csv or .dmnd)")->required();
  reproduce->add_option("--config", config_path, "JSON configuration file");
  reproduce->add_option("--split-seed", split_seed, "Seed for the row split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad command line reads as malformed input
  }

  try {
    if (decompose->parsed()) return cmd_decompose(input_path, config_path, out_dir);
    if (rank->parsed()) return cmd_rank(input_path);
    if (synth->parsed()) {
      demand::SynthSpec spec = flag_spec;
      if (!flag_ranks.empty()) spec.ranks = flag_ranks;
      if (!spec_path.empty()) {
        spec = demand::parse_synth_spec_json(demand::read_text_file(spec_path));
      }
      return cmd_synth(spec, out_dir);
    }
    if (evaluate->parsed()) return cmd_evaluate(dir_a, dir_b, metric);
    if (reproduce->parsed()) return cmd_reproduce(input_path, config_path, split_seed);
  } catch (const demand::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const demand::ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const demand::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const demand::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
