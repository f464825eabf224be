#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <vector>

#include "motsim/core.hpp"

namespace motsim {

/// Discretization of the image plane into heatmap cells.
struct GridSpec {
  int rows = 0;
  int cols = 0;
  double cell_size = 4.0;  // pixels per cell

  static GridSpec for_image(double image_width, double image_height,
                            double cell_size = 4.0);

  double image_width() const { return cols * cell_size; }
  double image_height() const { return rows * cell_size; }
};

/// Dense object-center likelihood grid. Cell values live in [0, 1].
class Heatmap {
 public:
  Heatmap() = default;
  explicit Heatmap(const GridSpec& spec)
      : spec_(spec), grid_(Eigen::MatrixXd::Zero(spec.rows, spec.cols)) {}

  const GridSpec& spec() const { return spec_; }
  const Eigen::MatrixXd& grid() const { return grid_; }
  Eigen::MatrixXd& grid() { return grid_; }

  /// Value of the cell containing the pixel point; 0 outside the grid.
  double at_pixel(double x, double y) const;

  /// Debug dump: row-major dense CSV, 6-decimal fixed point.
  void write_csv(std::ostream& out) const;

  bool operator==(const Heatmap& other) const {
    return spec_.rows == other.spec_.rows && spec_.cols == other.spec_.cols &&
           spec_.cell_size == other.spec_.cell_size && grid_ == other.grid_;
  }

 private:
  GridSpec spec_;
  Eigen::MatrixXd grid_;
};

/// One object as seen at a keyframe: where it is, how big it is, and how
/// fast it was moving (pixels/frame). Extents are held constant under
/// extrapolation; only centers move.
struct AttentionObject {
  double center_x = 0.0;
  double center_y = 0.0;
  BoundingBox extent{0.0, 0.0, 1.0, 1.0};
  double velocity_x = 0.0;
  double velocity_y = 0.0;
  int track_id = 0;
};

/// Teacher knowledge captured at keyframe k: the rendered heatmap plus the
/// per-object state the extrapolation operator advances.
struct AttentionSnapshot {
  int keyframe_index = 0;
  Heatmap heatmap;
  std::vector<AttentionObject> objects;
};

/// Renders unnormalized Gaussian splats, peak 1.0 at each object's center
/// cell, std = max(1, min(w,h) / (8 * cell_size)) cells. Overlapping splats
/// combine by elementwise max. Centers outside the image are clamped to the
/// nearest boundary cell.
Heatmap render_heatmap(const std::vector<AttentionObject>& objects,
                       const GridSpec& spec);

/// Advances every object's center by velocity * offset (clamped to image
/// bounds) and re-renders. offset 0 reproduces the keyframe heatmap exactly.
Heatmap extrapolate_attention(const AttentionSnapshot& snapshot, int offset);

/// Cell value containing the pixel point; 0 outside the grid.
double attention_at(const Heatmap& heatmap, double x, double y);

}  // namespace motsim
