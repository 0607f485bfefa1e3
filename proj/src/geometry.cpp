#include "scenediff/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace scenediff {

BoundingBox::BoundingBox(double x_min, double y_min, double x_max, double y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
  if (!std::isfinite(x_min) || !std::isfinite(y_min) || !std::isfinite(x_max) ||
      !std::isfinite(y_max)) {
    throw std::invalid_argument("bounding box has non-finite coordinate");
  }
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw std::invalid_argument("bounding box has non-positive area: " +
                                to_string(*this));
  }
}

BoundingBox BoundingBox::translated(double dx, double dy) const {
  return {x_min_ + dx, y_min_ + dy, x_max_ + dx, y_max_ + dy};
}

BoundingBox BoundingBox::scaled(double s) const {
  return {x_min_ * s, y_min_ * s, x_max_ * s, y_max_ * s};
}

bool BoundingBox::contains(const BoundingBox& o) const {
  return o.x_min_ >= x_min_ && o.y_min_ >= y_min_ && o.x_max_ <= x_max_ &&
         o.y_max_ <= y_max_;
}

bool BoundingBox::strictly_contains(const BoundingBox& o) const {
  return o.x_min_ > x_min_ && o.y_min_ > y_min_ && o.x_max_ < x_max_ &&
         o.y_max_ < y_max_;
}

std::string to_string(const BoundingBox& b) {
  std::ostringstream os;
  os << "(" << b.x_min() << ", " << b.y_min() << ", " << b.x_max() << ", "
     << b.y_max() << ")";
  return os.str();
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (w <= 0.0 || h <= 0.0) {
    return 0.0;
  }
  return w * h;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  if (inter == 0.0) {
    return 0.0;
  }
  return inter / (a.area() + b.area() - inter);
}

Point center(const BoundingBox& b) {
  return {(b.x_min() + b.x_max()) / 2.0, (b.y_min() + b.y_max()) / 2.0};
}

double displacement(const BoundingBox& a, const BoundingBox& b) {
  const Point ca = center(a);
  const Point cb = center(b);
  return std::hypot(cb.x - ca.x, cb.y - ca.y);
}

BoundingBox union_box(const BoundingBox& a, const BoundingBox& b) {
  return {std::min(a.x_min(), b.x_min()), std::min(a.y_min(), b.y_min()),
          std::max(a.x_max(), b.x_max()), std::max(a.y_max(), b.y_max())};
}

double containment(const BoundingBox& subject, const BoundingBox& other) {
  return intersection_area(subject, other) / subject.area();
}

}  // namespace scenediff
