#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "motsim/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> policy_override;
  std::vector<int> k_override;
  std::string gt_path;
  bool quiet = false;
};

void add_common_flags(CLI::App& app, CommonOptions& opts) {
  app.add_option("--config", opts.config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", opts.out_dir, "output directory");
  app.add_option("--seed", opts.seed_override,
                 "override the config's seed list with a single seed");
  app.add_option("--policy", opts.policy_override,
                 "override the config's policy list with a single policy");
  app.add_option("--k", opts.k_override,
                 "override the config's K list (repeatable)");
  app.add_option("--gt", opts.gt_path,
                 "MOTChallenge ground-truth file replacing the synthetic "
                 "world");
  app.add_flag("--quiet", opts.quiet, "suppress progress output");
}

motsim::ExperimentConfig load_config(const CommonOptions& opts) {
  auto config = motsim::load_experiment_config_file(opts.config_path);
  if (opts.seed_override) config.seeds = {*opts.seed_override};
  if (opts.policy_override) {
    config.policies = {motsim::policy_from_string(*opts.policy_override)};
  }
  if (!opts.k_override.empty()) config.k_values = opts.k_override;
  return config;
}

std::optional<motsim::GroundTruthSequence> load_gt(
    const CommonOptions& opts, const motsim::ExperimentConfig& config) {
  if (opts.gt_path.empty()) return std::nullopt;
  std::ifstream in(opts.gt_path);
  if (!in) {
    throw std::invalid_argument("cannot open ground-truth file: " +
                                opts.gt_path);
  }
  return motsim::load_mot_ground_truth(in, config.world.feature_dim,
                                       config.world.seed);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write output file: " + path.string());
  }
  out << content;
}

int run_command(const CommonOptions& opts) {
  const auto config = load_config(opts);
  const auto gt = load_gt(opts, config);
  const auto output = motsim::run_experiment(config, gt);

  fs::create_directories(opts.out_dir);
  write_file(fs::path(opts.out_dir) / "results.csv", output.csv);
  write_file(fs::path(opts.out_dir) / "summary.json",
             output.summary().dump(2) + "\n");
  if (!opts.quiet) {
    std::cout << output.csv;
    std::cout << "wrote " << output.rows.size() << " runs to " << opts.out_dir
              << std::endl;
  }
  return 0;
}

int sweep_command(const CommonOptions& opts) {
  const auto config = load_config(opts);
  const auto gt = load_gt(opts, config);
  const auto k_values =
      opts.k_override.empty() ? config.k_values : opts.k_override;
  const auto rows = motsim::sweep_k(config, k_values, gt);
  const std::string csv = motsim::sweep_csv(rows);

  fs::create_directories(opts.out_dir);
  write_file(fs::path(opts.out_dir) / "sweep.csv", csv);
  if (!opts.quiet) std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interleaved teacher/student tracking benchmark"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  CLI::App* run = app.add_subcommand(
      "run", "run every (policy, K, seed) combination; write CSV + summary");
  add_common_flags(*run, run_opts);

  CommonOptions sweep_opts;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "accuracy-throughput frontier over K; write sweep.csv");
  add_common_flags(*sweep, sweep_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(run_opts);
    if (sweep->parsed()) return sweep_command(sweep_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
