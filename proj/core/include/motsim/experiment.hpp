#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "motsim/metrics.hpp"
#include "motsim/scheduler.hpp"
#include "motsim/simworld.hpp"

namespace motsim {

inline constexpr const char* kCsvHeader =
    "policy,K,alignment,seed,MOTA,IDF1,FP,FN,IDSW,GT,FPS_sim";

struct ExperimentConfig {
  WorldConfig world;
  DetectorProfile teacher;
  DetectorProfile student;
  std::vector<PolicyKind> policies;
  std::vector<int> k_values;
  std::vector<std::uint64_t> seeds;
  PipelineOptions pipeline;
  bool alignment = false;
  std::string output_dir = ".";
};

/// Parses an experiment config document; errors name the offending field.
ExperimentConfig load_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config_file(const std::string& path);

struct RunRow {
  PolicyKind policy;
  int k = 1;
  bool alignment = false;
  std::uint64_t seed = 0;
  MotReport report;

  std::string csv() const;
};

struct ExperimentOutput {
  std::vector<RunRow> rows;  // deterministic order: policy, K, seed
  std::string csv;           // header + one row per run
  nlohmann::json summary() const;  // per-configuration means over seeds
};

/// Runs every (policy, K, seed) combination. Runs execute in parallel but
/// the output order is fixed by the config, so the CSV is byte-stable.
/// When external_gt is set it replaces the synthetic world for every run.
ExperimentOutput run_experiment(
    const ExperimentConfig& config,
    const std::optional<GroundTruthSequence>& external_gt = std::nullopt,
    bool parallel = true);

struct SweepRow {
  PolicyKind policy;
  int k = 1;
  double mean_mota = 0.0;
  double mean_fps = 0.0;
};

/// Accuracy-throughput frontier: one row per (policy, K) with seed means.
std::vector<SweepRow> sweep_k(
    const ExperimentConfig& config, const std::vector<int>& k_values,
    const std::optional<GroundTruthSequence>& external_gt = std::nullopt,
    bool parallel = true);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace motsim
