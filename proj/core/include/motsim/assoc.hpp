#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "motsim/core.hpp"
#include "motsim/motion.hpp"

namespace motsim {

/// Cosine similarity in [-1, 1]. A zero vector on either side yields 0 by
/// convention. Throws on dimension mismatch.
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col)
  double total_cost = 0.0;
};

/// Minimum-cost one-to-one assignment of min(n, m) pairs. Costs must be
/// finite; use a large sentinel for forbidden pairs and filter afterwards.
/// An empty matrix yields an empty assignment.
Assignment hungarian(const Eigen::MatrixXd& cost);

struct AssociationConfig {
  double appearance_threshold = 0.4;  // cosine distance gate
  double iou_threshold = 0.5;
  int max_age = 30;                   // frames before termination
  double feature_smoothing = 0.9;     // EMA weight on the old feature
};

/// One trajectory. Boxes are keyed by strictly increasing frame indices.
struct Track {
  int id = 0;
  std::map<int, BoundingBox> boxes;
  FeatureVector feature;  // exponentially smoothed, unit norm
  KalmanState state;
  TrackStatus status = TrackStatus::kActive;
  int frames_since_update = 0;
  std::vector<std::pair<int, Eigen::Vector2d>> center_history;  // raw centers

  /// Kalman-predicted box for the current frame (predict() already applied).
  BoundingBox predicted_box() const { return state.to_box(); }
};

struct AssociationResult {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (track, det)
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
};

/// Two-stage matching: appearance-gated Hungarian on cosine distance, each
/// tentative pair confirmed by IoU against the track's predicted box; then
/// IoU-only Hungarian over the leftovers with the same gate.
AssociationResult associate(const std::vector<Track>& tracks,
                            const std::vector<Detection>& detections,
                            const AssociationConfig& config);

struct TrackedBox {
  int track_id = 0;
  BoundingBox box{0.0, 0.0, 1.0, 1.0};
};

/// Tracker state machine: predicts, associates, extends or spawns
/// trajectories, ages and terminates stale ones. Track ids start at 1 and
/// are never reused.
class Tracker {
 public:
  explicit Tracker(const AssociationConfig& config = {},
                   const KalmanConfig& kalman = {},
                   int velocity_window = 3);

  /// Processes one frame; frame indices must be strictly increasing across
  /// calls. Returns the boxes updated or spawned this frame with their ids.
  std::vector<TrackedBox> step(const FrameDetections& frame);

  const std::vector<Track>& tracks() const { return tracks_; }
  int velocity_window() const { return velocity_window_; }

 private:
  AssociationConfig config_;
  KalmanFilter filter_;
  int velocity_window_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  int last_frame_ = -1;
  bool has_frame_ = false;
};

}  // namespace motsim
