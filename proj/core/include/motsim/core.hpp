#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace motsim {

/// Axis-aligned rectangle stored in MOTChallenge left-top-width-height form.
/// Extents are strictly positive; degenerate boxes are rejected at
/// construction. Center form is computed on demand.
class BoundingBox {
 public:
  BoundingBox(double left, double top, double width, double height)
      : left_(left), top_(top), width_(width), height_(height) {
    if (!(width > 0.0) || !(height > 0.0)) {
      throw std::invalid_argument("BoundingBox: extents must be positive");
    }
  }

  static BoundingBox from_center(double cx, double cy, double width,
                                 double height) {
    return BoundingBox(cx - width / 2.0, cy - height / 2.0, width, height);
  }

  double left() const { return left_; }
  double top() const { return top_; }
  double width() const { return width_; }
  double height() const { return height_; }
  double right() const { return left_ + width_; }
  double bottom() const { return top_ + height_; }
  double center_x() const { return left_ + width_ / 2.0; }
  double center_y() const { return top_ + height_ / 2.0; }
  double aspect() const { return width_ / height_; }
  double area() const { return width_ * height_; }

 private:
  double left_, top_, width_, height_;
};

/// Intersection over union, in [0, 1]; symmetric.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Appearance embedding attached to a detection. Dimension is fixed per run
/// (default 16) and checked wherever two features meet.
using FeatureVector = Eigen::VectorXd;

enum class ModelSource { kTeacher, kStudent };

const char* to_string(ModelSource source);

struct Detection {
  BoundingBox rect;
  FeatureVector feature;
  double score = 1.0;  // in [0, 1]
  ModelSource source = ModelSource::kStudent;
};

struct FrameDetections {
  int frame_index = 0;  // non-negative, monotone within a sequence
  std::vector<Detection> detections;
};

enum class TrackStatus { kActive, kLost, kTerminated };

}  // namespace motsim
