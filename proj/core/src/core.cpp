#include "motsim/core.hpp"

#include <algorithm>

namespace motsim {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double x1 = std::max(a.left(), b.left());
  const double y1 = std::max(a.top(), b.top());
  const double x2 = std::min(a.right(), b.right());
  const double y2 = std::min(a.bottom(), b.bottom());
  const double iw = x2 - x1;
  const double ih = y2 - y1;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

const char* to_string(ModelSource source) {
  return source == ModelSource::kTeacher ? "teacher" : "student";
}

}  // namespace motsim
