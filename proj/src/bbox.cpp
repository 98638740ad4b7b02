#include "lowmot/bbox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lowmot {

BBox::BBox(double left, double top, double width, double height)
    : left(left), top(top), width(width), height(height) {
  if (!(std::isfinite(left) && std::isfinite(top) && std::isfinite(width) &&
        std::isfinite(height))) {
    throw std::invalid_argument("BBox: fields must be finite");
  }
  if (!(width > 0.0 && height > 0.0)) {
    throw std::invalid_argument("BBox: width and height must be positive");
  }
}

std::pair<double, double> center(const BBox& b) {
  return {b.left + b.width / 2.0, b.top + b.height / 2.0};
}

BBox bbox_from_center(double cx, double cy, double w, double h) {
  return BBox(cx - w / 2.0, cy - h / 2.0, w, h);
}

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left, b.left);
  if (iw <= 0.0) return 0.0;
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
  if (ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

}  // namespace lowmot
