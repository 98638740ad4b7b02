#pragma once

#include <utility>

namespace lowmot {

// Axis-aligned pixel rectangle stored as (left, top, width, height),
// matching the MOT file convention. Center form is derived on demand.
struct BBox {
  double left;
  double top;
  double width;
  double height;

  BBox(double left, double top, double width, double height);

  double right() const { return left + width; }
  double bottom() const { return top + height; }
  double area() const { return width * height; }
};

std::pair<double, double> center(const BBox& b);

BBox bbox_from_center(double cx, double cy, double w, double h);

// Intersection over union; 0 for disjoint boxes, 1 for identical ones.
double iou(const BBox& a, const BBox& b);

}  // namespace lowmot
