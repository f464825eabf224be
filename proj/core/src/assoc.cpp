#include "motsim/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace motsim {

namespace {

constexpr double kForbidden = 1e9;

FeatureVector normalized_or_zero(const FeatureVector& f) {
  const double norm = f.norm();
  if (norm <= 0.0) return f;
  return f / norm;
}

}  // namespace

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

Assignment hungarian(const Eigen::MatrixXd& cost) {
  int n = static_cast<int>(cost.rows());
  int m = static_cast<int>(cost.cols());
  if (n == 0 || m == 0) return {};

  const bool transposed = n > m;
  Eigen::MatrixXd a = transposed ? Eigen::MatrixXd(cost.transpose()) : cost;
  if (transposed) std::swap(n, m);

  // Jonker-Volgenant style shortest augmenting paths with potentials.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> match(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment result;
  for (int j = 1; j <= m; ++j) {
    if (match[j] == 0) continue;
    const int row = match[j] - 1;
    const int col = j - 1;
    result.total_cost += a(row, col);
    result.pairs.emplace_back(transposed ? col : row, transposed ? row : col);
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  return result;
}

AssociationResult associate(const std::vector<Track>& tracks,
                            const std::vector<Detection>& detections,
                            const AssociationConfig& config) {
  AssociationResult result;
  std::vector<std::size_t> track_pool(tracks.size());
  std::vector<std::size_t> det_pool(detections.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) track_pool[i] = i;
  for (std::size_t j = 0; j < detections.size(); ++j) det_pool[j] = j;

  // Stage 1: appearance. Tentative pairs must also clear the IoU gate
  // against the predicted box to count as true matches.
  if (!track_pool.empty() && !det_pool.empty()) {
    Eigen::MatrixXd cost(track_pool.size(), det_pool.size());
    for (std::size_t i = 0; i < track_pool.size(); ++i) {
      for (std::size_t j = 0; j < det_pool.size(); ++j) {
        const double dist =
            1.0 - cosine_similarity(tracks[track_pool[i]].feature,
                                    detections[det_pool[j]].feature);
        cost(i, j) = dist <= config.appearance_threshold ? dist : kForbidden;
      }
    }
    std::vector<char> track_taken(track_pool.size(), 0);
    std::vector<char> det_taken(det_pool.size(), 0);
    for (const auto& [i, j] : hungarian(cost).pairs) {
      if (cost(i, j) >= kForbidden) continue;
      const Track& track = tracks[track_pool[i]];
      const Detection& det = detections[det_pool[j]];
      if (iou(track.predicted_box(), det.rect) < config.iou_threshold) {
        continue;  // stage-2 veto
      }
      result.matches.emplace_back(track_pool[i], det_pool[j]);
      track_taken[i] = 1;
      det_taken[j] = 1;
    }
    std::vector<std::size_t> rest_tracks, rest_dets;
    for (std::size_t i = 0; i < track_pool.size(); ++i) {
      if (!track_taken[i]) rest_tracks.push_back(track_pool[i]);
    }
    for (std::size_t j = 0; j < det_pool.size(); ++j) {
      if (!det_taken[j]) rest_dets.push_back(det_pool[j]);
    }
    track_pool.swap(rest_tracks);
    det_pool.swap(rest_dets);
  }

  // Stage 2: IoU only.
  if (!track_pool.empty() && !det_pool.empty()) {
    Eigen::MatrixXd cost(track_pool.size(), det_pool.size());
    for (std::size_t i = 0; i < track_pool.size(); ++i) {
      const BoundingBox predicted = tracks[track_pool[i]].predicted_box();
      for (std::size_t j = 0; j < det_pool.size(); ++j) {
        const double overlap = iou(predicted, detections[det_pool[j]].rect);
        cost(i, j) =
            overlap >= config.iou_threshold ? 1.0 - overlap : kForbidden;
      }
    }
    std::vector<char> track_taken(track_pool.size(), 0);
    std::vector<char> det_taken(det_pool.size(), 0);
    for (const auto& [i, j] : hungarian(cost).pairs) {
      if (cost(i, j) >= kForbidden) continue;
      result.matches.emplace_back(track_pool[i], det_pool[j]);
      track_taken[i] = 1;
      det_taken[j] = 1;
    }
    std::vector<std::size_t> rest_tracks, rest_dets;
    for (std::size_t i = 0; i < track_pool.size(); ++i) {
      if (!track_taken[i]) rest_tracks.push_back(track_pool[i]);
    }
    for (std::size_t j = 0; j < det_pool.size(); ++j) {
      if (!det_taken[j]) rest_dets.push_back(det_pool[j]);
    }
    track_pool.swap(rest_tracks);
    det_pool.swap(rest_dets);
  }

  result.unmatched_tracks = std::move(track_pool);
  result.unmatched_detections = std::move(det_pool);
  std::sort(result.matches.begin(), result.matches.end());
  return result;
}

Tracker::Tracker(const AssociationConfig& config, const KalmanConfig& kalman,
                 int velocity_window)
    : config_(config), filter_(kalman), velocity_window_(velocity_window) {}

std::vector<TrackedBox> Tracker::step(const FrameDetections& frame) {
  if (has_frame_ && frame.frame_index <= last_frame_) {
    throw std::invalid_argument("Tracker::step: out-of-order frame index");
  }
  last_frame_ = frame.frame_index;
  has_frame_ = true;

  for (auto& track : tracks_) track.state = filter_.predict(track.state);

  const AssociationResult assoc =
      associate(tracks_, frame.detections, config_);

  std::vector<TrackedBox> output;
  output.reserve(assoc.matches.size() + assoc.unmatched_detections.size());

  for (const auto& [track_idx, det_idx] : assoc.matches) {
    Track& track = tracks_[track_idx];
    const Detection& det = frame.detections[det_idx];
    track.state = filter_.update(track.state, det.rect);
    const FeatureVector incoming = normalized_or_zero(det.feature);
    if (track.feature.size() == incoming.size()) {
      track.feature = normalized_or_zero(
          (config_.feature_smoothing * track.feature +
           (1.0 - config_.feature_smoothing) * incoming)
              .eval());
    } else {
      track.feature = incoming;
    }
    track.boxes.emplace(frame.frame_index, det.rect);
    track.center_history.emplace_back(
        frame.frame_index,
        Eigen::Vector2d(det.rect.center_x(), det.rect.center_y()));
    if (static_cast<int>(track.center_history.size()) >
        std::max(velocity_window_, 2) * 4) {
      track.center_history.erase(track.center_history.begin());
    }
    track.frames_since_update = 0;
    track.status = TrackStatus::kActive;
    output.push_back({track.id, det.rect});
  }

  for (const std::size_t track_idx : assoc.unmatched_tracks) {
    Track& track = tracks_[track_idx];
    ++track.frames_since_update;
    track.status = track.frames_since_update > config_.max_age
                       ? TrackStatus::kTerminated
                       : TrackStatus::kLost;
  }

  for (const std::size_t det_idx : assoc.unmatched_detections) {
    const Detection& det = frame.detections[det_idx];
    Track track;
    track.id = next_id_++;
    track.boxes.emplace(frame.frame_index, det.rect);
    track.feature = normalized_or_zero(det.feature);
    track.state = filter_.init(det.rect);
    track.status = TrackStatus::kActive;
    track.center_history.emplace_back(
        frame.frame_index,
        Eigen::Vector2d(det.rect.center_x(), det.rect.center_y()));
    output.push_back({track.id, det.rect});
    tracks_.push_back(std::move(track));
  }

  std::erase_if(tracks_, [](const Track& t) {
    return t.status == TrackStatus::kTerminated;
  });

  std::sort(output.begin(), output.end(),
            [](const TrackedBox& a, const TrackedBox& b) {
              return a.track_id < b.track_id;
            });
  return output;
}

}  // namespace motsim
