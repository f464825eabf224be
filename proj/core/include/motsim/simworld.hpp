#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "motsim/attention.hpp"
#include "motsim/core.hpp"

namespace motsim {

/// Synthetic arena standing in for a MOT video. Objects move with constant
/// velocity plus small acceleration noise and reflect off the walls.
struct WorldConfig {
  double arena_width = 1088.0;
  double arena_height = 608.0;
  int n_objects = 20;
  int frames = 600;
  double speed_range = 3.0;      // max speed, pixels/frame
  double motion_noise = 0.05;    // acceleration std, pixels/frame^2
  double birth_rate = 0.0;       // per-frame probability of one new object
  double death_rate = 0.0;       // per-object per-frame probability
  double occlusion_rate = 0.0;   // per-object per-frame probability
  std::uint64_t seed = 1;
  int feature_dim = 16;
};

struct GtObject {
  int id = 0;
  BoundingBox box{0.0, 0.0, 1.0, 1.0};
  FeatureVector embedding;  // unit-norm latent identity embedding
  bool occluded = false;
  double conf = 1.0;  // preserved from MOT files; 1 for synthetic objects
};

struct GtFrame {
  int frame_index = 1;  // 1-based, MOTChallenge convention
  std::vector<GtObject> objects;
};

struct GroundTruthSequence {
  std::vector<GtFrame> frames;
  double arena_width = 0.0;
  double arena_height = 0.0;
  int feature_dim = 0;
};

/// Deterministic given the seed.
GroundTruthSequence generate_world(const WorldConfig& config);

/// Unit-norm embedding derived from a seeded hash of the identity; the same
/// (seed, id) always yields the same vector.
FeatureVector identity_embedding(std::uint64_t seed, int id, int dim);

/// Parametric detector. Recall, clutter, localization noise, re-ID feature
/// domain and per-frame cost are independent axes.
struct DetectorProfile {
  std::string name = "detector";
  ModelSource source = ModelSource::kStudent;
  double base_recall = 0.9;
  double occluded_recall = 0.5;   // <= base_recall
  double clutter_rate = 0.0;      // expected false positives per frame
  double localization_std = 0.0;  // pixels
  Eigen::MatrixXd feature_transform;  // d x d re-ID domain
  double feature_noise_std = 0.0;
  double attention_gain = 0.0;    // in [0, 1]
  double cost_per_frame_ms = 10.0;
};

/// Simulated detection pass. Each object is kept with probability
/// clamp(recall + attention_gain * attention_at(center), 0, 1) using a
/// counter-based draw keyed by (seed, frame, object id), so two policies
/// issuing the same call see the same randomness. Kept boxes are perturbed
/// by localization noise; features are transform * embedding + noise.
/// Poisson clutter adds false positives with random boxes and features.
FrameDetections detect(const DetectorProfile& profile, const GtFrame& frame,
                       const Heatmap* attention, std::uint64_t seed);

/// Parses MOTChallenge lines
/// `frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z`.
/// Malformed lines raise an error carrying the line number; non-positive
/// extents are rejected. Embeddings are synthesized per id from the seed.
GroundTruthSequence load_mot_ground_truth(std::istream& in, int feature_dim,
                                          std::uint64_t seed);

/// Canonical serialization of a ground-truth sequence; parse -> save
/// reproduces canonical lines byte for byte.
void save_mot_ground_truth(const GroundTruthSequence& sequence,
                           std::ostream& out);

struct ResultFrame {
  int frame_index = 1;
  std::vector<std::pair<int, BoundingBox>> boxes;  // (track id, box)
};

/// Tracker output in MOTChallenge result format (conf 1, trailing -1s).
void save_mot_results(const std::vector<ResultFrame>& frames,
                      std::ostream& out);

}  // namespace motsim
