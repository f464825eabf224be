#include "motsim/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace motsim {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

[[noreturn]] void field_error(const std::string& field,
                              const std::string& what) {
  throw std::invalid_argument("config field '" + field + "': " + what);
}

double get_number(const nlohmann::json& doc, const std::string& field,
                  double fallback) {
  if (!doc.contains(field)) return fallback;
  if (!doc.at(field).is_number()) field_error(field, "expected a number");
  return doc.at(field).get<double>();
}

void check_unit(double v, const std::string& field) {
  if (v < 0.0 || v > 1.0) field_error(field, "must be in [0, 1]");
}

Eigen::MatrixXd random_rotation(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd gaussian(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) gaussian(r, c) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix signs so the factorization is unique.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < dim; ++c) {
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  }
  return q;
}

Eigen::MatrixXd parse_feature_transform(const nlohmann::json& doc,
                                        const std::string& prefix, int dim) {
  if (!doc.contains("feature_transform")) {
    return Eigen::MatrixXd::Identity(dim, dim);
  }
  const auto& node = doc.at("feature_transform");
  if (node.is_string()) {
    const auto kind = node.get<std::string>();
    if (kind == "identity") return Eigen::MatrixXd::Identity(dim, dim);
    field_error(prefix + ".feature_transform", "unknown kind '" + kind + "'");
  }
  if (!node.is_object()) {
    field_error(prefix + ".feature_transform", "expected string or object");
  }
  const auto kind = node.value("kind", std::string("identity"));
  if (kind == "identity") return Eigen::MatrixXd::Identity(dim, dim);
  if (kind == "rotation") {
    return random_rotation(
        dim, node.value("seed", static_cast<std::uint64_t>(7)));
  }
  if (kind == "matrix") {
    const auto& values = node.at("values");
    if (static_cast<int>(values.size()) != dim * dim) {
      field_error(prefix + ".feature_transform.values",
                  "expected " + std::to_string(dim * dim) + " entries");
    }
    Eigen::MatrixXd m(dim, dim);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) m(r, c) = values[r * dim + c];
    }
    return m;
  }
  field_error(prefix + ".feature_transform", "unknown kind '" + kind + "'");
}

DetectorProfile parse_profile(const nlohmann::json& doc,
                              const std::string& prefix, ModelSource source,
                              int dim) {
  DetectorProfile profile;
  profile.name = doc.value("name", prefix);
  profile.source = source;
  profile.base_recall = get_number(doc, "base_recall", 0.9);
  profile.occluded_recall = get_number(doc, "occluded_recall", 0.5);
  profile.clutter_rate = get_number(doc, "clutter_rate", 0.0);
  profile.localization_std = get_number(doc, "localization_std", 0.0);
  profile.feature_noise_std = get_number(doc, "feature_noise_std", 0.0);
  profile.attention_gain = get_number(doc, "attention_gain", 0.0);
  profile.cost_per_frame_ms = get_number(doc, "cost_per_frame_ms", 10.0);
  profile.feature_transform = parse_feature_transform(doc, prefix, dim);
  check_unit(profile.base_recall, prefix + ".base_recall");
  check_unit(profile.occluded_recall, prefix + ".occluded_recall");
  check_unit(profile.attention_gain, prefix + ".attention_gain");
  if (profile.occluded_recall > profile.base_recall) {
    field_error(prefix + ".occluded_recall", "must not exceed base_recall");
  }
  if (profile.cost_per_frame_ms <= 0.0) {
    field_error(prefix + ".cost_per_frame_ms", "must be > 0");
  }
  return profile;
}

WorldConfig parse_world(const nlohmann::json& doc) {
  WorldConfig world;
  world.arena_width = get_number(doc, "arena_width", world.arena_width);
  world.arena_height = get_number(doc, "arena_height", world.arena_height);
  world.n_objects =
      static_cast<int>(get_number(doc, "n_objects", world.n_objects));
  world.frames = static_cast<int>(get_number(doc, "frames", world.frames));
  world.speed_range = get_number(doc, "speed_range", world.speed_range);
  world.motion_noise = get_number(doc, "motion_noise", world.motion_noise);
  world.birth_rate = get_number(doc, "birth_rate", world.birth_rate);
  world.death_rate = get_number(doc, "death_rate", world.death_rate);
  world.occlusion_rate =
      get_number(doc, "occlusion_rate", world.occlusion_rate);
  world.seed = static_cast<std::uint64_t>(get_number(doc, "seed", 1.0));
  world.feature_dim =
      static_cast<int>(get_number(doc, "feature_dim", world.feature_dim));
  if (world.arena_width <= 0.0 || world.arena_height <= 0.0) {
    field_error("world.arena_width/arena_height", "must be positive");
  }
  check_unit(world.birth_rate, "world.birth_rate");
  check_unit(world.death_rate, "world.death_rate");
  check_unit(world.occlusion_rate, "world.occlusion_rate");
  if (world.frames < 1) field_error("world.frames", "must be >= 1");
  if (world.feature_dim < 1) field_error("world.feature_dim", "must be >= 1");
  return world;
}

}  // namespace

ExperimentConfig load_experiment_config(const nlohmann::json& doc) {
  ExperimentConfig config;
  config.world = parse_world(doc.value("world", nlohmann::json::object()));
  const int dim = config.world.feature_dim;
  if (!doc.contains("teacher")) field_error("teacher", "missing");
  if (!doc.contains("student")) field_error("student", "missing");
  config.teacher = parse_profile(doc.at("teacher"), "teacher",
                                 ModelSource::kTeacher, dim);
  config.student = parse_profile(doc.at("student"), "student",
                                 ModelSource::kStudent, dim);

  if (!doc.contains("policies") || doc.at("policies").empty()) {
    field_error("policies", "must be a non-empty list");
  }
  for (const auto& name : doc.at("policies")) {
    config.policies.push_back(policy_from_string(name.get<std::string>()));
  }
  if (!doc.contains("k_values") || doc.at("k_values").empty()) {
    field_error("k_values", "must be a non-empty list");
  }
  for (const auto& k : doc.at("k_values")) {
    const int value = k.get<int>();
    if (value < 1) field_error("k_values", "entries must be >= 1");
    config.k_values.push_back(value);
  }
  if (!doc.contains("seeds") || doc.at("seeds").empty()) {
    field_error("seeds", "must be a non-empty list");
  }
  for (const auto& seed : doc.at("seeds")) {
    config.seeds.push_back(seed.get<std::uint64_t>());
  }

  const auto assoc = doc.value("assoc", nlohmann::json::object());
  config.pipeline.assoc.appearance_threshold = get_number(
      assoc, "appearance_threshold", config.pipeline.assoc.appearance_threshold);
  config.pipeline.assoc.iou_threshold =
      get_number(assoc, "iou_threshold", config.pipeline.assoc.iou_threshold);
  config.pipeline.assoc.max_age = static_cast<int>(
      get_number(assoc, "max_age", config.pipeline.assoc.max_age));
  config.pipeline.assoc.feature_smoothing = get_number(
      assoc, "feature_smoothing", config.pipeline.assoc.feature_smoothing);
  check_unit(config.pipeline.assoc.appearance_threshold,
             "assoc.appearance_threshold");
  check_unit(config.pipeline.assoc.iou_threshold, "assoc.iou_threshold");
  check_unit(config.pipeline.assoc.feature_smoothing,
             "assoc.feature_smoothing");
  if (config.pipeline.assoc.max_age < 1) {
    field_error("assoc.max_age", "must be >= 1");
  }

  config.pipeline.cell_size = get_number(doc, "cell_size", 4.0);
  config.pipeline.velocity_window =
      static_cast<int>(get_number(doc, "velocity_window", 3.0));
  if (doc.contains("alignment")) {
    if (!doc.at("alignment").is_boolean()) {
      field_error("alignment", "expected a boolean");
    }
    config.alignment = doc.at("alignment").get<bool>();
  }
  config.output_dir = doc.value("output", std::string("."));
  return config;
}

ExperimentConfig load_experiment_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("invalid JSON in " + path + ": " + e.what());
  }
  return load_experiment_config(doc);
}

std::string RunRow::csv() const {
  std::string row = to_string(policy);
  row += ',';
  row += std::to_string(k);
  row += ',';
  row += alignment ? "on" : "off";
  row += ',';
  row += std::to_string(seed);
  row += ',';
  row += fixed6(report.mota);
  row += ',';
  row += fixed6(report.idf1);
  row += ',';
  row += std::to_string(report.fp);
  row += ',';
  row += std::to_string(report.fn);
  row += ',';
  row += std::to_string(report.idsw);
  row += ',';
  row += std::to_string(report.gt_total);
  row += ',';
  row += fixed6(report.fps_simulated);
  return row;
}

nlohmann::json ExperimentOutput::summary() const {
  struct Accum {
    double mota = 0.0, idf1 = 0.0, fps = 0.0;
    long fp = 0, fn = 0, idsw = 0;
    int n = 0;
  };
  std::map<std::tuple<std::string, int, bool>, Accum> groups;
  for (const auto& row : rows) {
    auto& acc = groups[{to_string(row.policy), row.k, row.alignment}];
    acc.mota += row.report.mota;
    acc.idf1 += row.report.idf1;
    acc.fps += row.report.fps_simulated;
    acc.fp += row.report.fp;
    acc.fn += row.report.fn;
    acc.idsw += row.report.idsw;
    ++acc.n;
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [key, acc] : groups) {
    nlohmann::json entry;
    entry["policy"] = std::get<0>(key);
    entry["K"] = std::get<1>(key);
    entry["alignment"] = std::get<2>(key) ? "on" : "off";
    entry["seeds"] = acc.n;
    entry["mean_mota"] = acc.mota / acc.n;
    entry["mean_idf1"] = acc.idf1 / acc.n;
    entry["mean_fps_sim"] = acc.fps / acc.n;
    entry["mean_fp"] = static_cast<double>(acc.fp) / acc.n;
    entry["mean_fn"] = static_cast<double>(acc.fn) / acc.n;
    entry["mean_idsw"] = static_cast<double>(acc.idsw) / acc.n;
    out.push_back(entry);
  }
  return out;
}

ExperimentOutput run_experiment(
    const ExperimentConfig& config,
    const std::optional<GroundTruthSequence>& external_gt, bool parallel) {
  struct Job {
    PolicyKind policy;
    int k;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const PolicyKind policy : config.policies) {
    for (const int k : config.k_values) {
      for (const std::uint64_t seed : config.seeds) {
        jobs.push_back({policy, k, seed});
      }
    }
  }

  auto execute = [&](const Job& job) {
    GroundTruthSequence world;
    const GroundTruthSequence* gt = nullptr;
    if (external_gt) {
      gt = &*external_gt;
    } else {
      WorldConfig world_config = config.world;
      world_config.seed = job.seed;
      world = generate_world(world_config);
      gt = &world;
    }
    SchedulerPolicy policy{job.policy, job.k, config.alignment};
    const PipelineResult result =
        run_pipeline(*gt, policy, config.teacher, config.student,
                     config.pipeline, job.seed);
    RunRow row{job.policy, job.k, config.alignment, job.seed, {}};
    row.report = clear_mot(*gt, result.frames,
                           config.pipeline.assoc.iou_threshold);
    row.report.fps_simulated = result.simulated_fps();
    return row;
  };

  ExperimentOutput output;
  output.rows.resize(jobs.size());
  if (parallel && jobs.size() > 1) {
    std::vector<std::future<RunRow>> futures;
    futures.reserve(jobs.size());
    for (const Job& job : jobs) {
      futures.push_back(
          std::async(std::launch::async, [&execute, job] { return execute(job); }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) {
      output.rows[i] = futures[i].get();
    }
  } else {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      output.rows[i] = execute(jobs[i]);
    }
  }

  output.csv = std::string(kCsvHeader) + "\n";
  for (const auto& row : output.rows) {
    output.csv += row.csv();
    output.csv += '\n';
  }
  return output;
}

std::vector<SweepRow> sweep_k(
    const ExperimentConfig& config, const std::vector<int>& k_values,
    const std::optional<GroundTruthSequence>& external_gt, bool parallel) {
  ExperimentConfig sweep_config = config;
  sweep_config.k_values = k_values;
  const ExperimentOutput output =
      run_experiment(sweep_config, external_gt, parallel);

  std::vector<SweepRow> rows;
  for (const PolicyKind policy : sweep_config.policies) {
    for (const int k : k_values) {
      SweepRow row{policy, k, 0.0, 0.0};
      int n = 0;
      for (const auto& run : output.rows) {
        if (run.policy == policy && run.k == k) {
          row.mean_mota += run.report.mota;
          row.mean_fps += run.report.fps_simulated;
          ++n;
        }
      }
      if (n > 0) {
        row.mean_mota /= n;
        row.mean_fps /= n;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "policy,K,mean_MOTA,mean_FPS_sim\n";
  for (const auto& row : rows) {
    out += to_string(row.policy);
    out += ',';
    out += std::to_string(row.k);
    out += ',';
    out += fixed6(row.mean_mota);
    out += ',';
    out += fixed6(row.mean_fps);
    out += '\n';
  }
  return out;
}

}  // namespace motsim
