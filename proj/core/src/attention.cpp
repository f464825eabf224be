#include "motsim/attention.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

namespace motsim {

GridSpec GridSpec::for_image(double image_width, double image_height,
                             double cell_size) {
  GridSpec spec;
  spec.cell_size = cell_size;
  spec.cols = std::max(1, static_cast<int>(std::ceil(image_width / cell_size)));
  spec.rows =
      std::max(1, static_cast<int>(std::ceil(image_height / cell_size)));
  return spec;
}

double Heatmap::at_pixel(double x, double y) const {
  if (grid_.size() == 0) return 0.0;
  const int col = static_cast<int>(std::floor(x / spec_.cell_size));
  const int row = static_cast<int>(std::floor(y / spec_.cell_size));
  if (row < 0 || col < 0 || row >= spec_.rows || col >= spec_.cols) return 0.0;
  return grid_(row, col);
}

void Heatmap::write_csv(std::ostream& out) const {
  out << std::fixed << std::setprecision(6);
  for (int r = 0; r < spec_.rows; ++r) {
    for (int c = 0; c < spec_.cols; ++c) {
      if (c > 0) out << ',';
      out << grid_(r, c);
    }
    out << '\n';
  }
}

namespace {

int clamp_cell(int v, int hi) { return std::clamp(v, 0, hi - 1); }

void splat(Eigen::MatrixXd& grid, const GridSpec& spec,
           const AttentionObject& obj) {
  const int center_col = clamp_cell(
      static_cast<int>(std::floor(obj.center_x / spec.cell_size)), spec.cols);
  const int center_row = clamp_cell(
      static_cast<int>(std::floor(obj.center_y / spec.cell_size)), spec.rows);
  const double sigma = std::max(
      1.0, std::min(obj.extent.width(), obj.extent.height()) /
               (8.0 * spec.cell_size));
  const int radius = static_cast<int>(std::ceil(6.0 * sigma));
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);

  const int r0 = std::max(0, center_row - radius);
  const int r1 = std::min(spec.rows - 1, center_row + radius);
  const int c0 = std::max(0, center_col - radius);
  const int c1 = std::min(spec.cols - 1, center_col + radius);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const double dr = r - center_row;
      const double dc = c - center_col;
      const double v = std::exp(-(dr * dr + dc * dc) * inv_two_sigma_sq);
      if (v > grid(r, c)) grid(r, c) = v;
    }
  }
}

}  // namespace

Heatmap render_heatmap(const std::vector<AttentionObject>& objects,
                       const GridSpec& spec) {
  Heatmap map(spec);
  for (const auto& obj : objects) splat(map.grid(), spec, obj);
  return map;
}

Heatmap extrapolate_attention(const AttentionSnapshot& snapshot, int offset) {
  const GridSpec& spec = snapshot.heatmap.spec();
  std::vector<AttentionObject> moved = snapshot.objects;
  for (auto& obj : moved) {
    obj.center_x = std::clamp(obj.center_x + obj.velocity_x * offset, 0.0,
                              spec.image_width());
    obj.center_y = std::clamp(obj.center_y + obj.velocity_y * offset, 0.0,
                              spec.image_height());
  }
  return render_heatmap(moved, spec);
}

double attention_at(const Heatmap& heatmap, double x, double y) {
  return heatmap.at_pixel(x, y);
}

}  // namespace motsim
