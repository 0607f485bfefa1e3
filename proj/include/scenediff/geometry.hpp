#pragma once

#include <string>

namespace scenediff {

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

/**
 * Axis-aligned box in image pixels (origin top-left, x right, y down).
 *
 * Construction validates the box: every coordinate finite and strictly
 * positive width and height. A default-constructed box is the unit square.
 */
class BoundingBox {
 public:
  BoundingBox() = default;
  BoundingBox(double x_min, double y_min, double x_max, double y_max);

  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double x_max() const { return x_max_; }
  double y_max() const { return y_max_; }

  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }
  double area() const { return width() * height(); }

  BoundingBox translated(double dx, double dy) const;
  BoundingBox scaled(double s) const;

  bool contains(const BoundingBox& other) const;
  // Strict containment: every edge of `other` lies strictly inside this box.
  bool strictly_contains(const BoundingBox& other) const;

  bool operator==(const BoundingBox&) const = default;

 private:
  double x_min_ = 0.0;
  double y_min_ = 0.0;
  double x_max_ = 1.0;
  double y_max_ = 1.0;
};

std::string to_string(const BoundingBox& b);

// Area of a∩b; zero when the intervals fail to overlap strictly.
double intersection_area(const BoundingBox& a, const BoundingBox& b);

double iou(const BoundingBox& a, const BoundingBox& b);

Point center(const BoundingBox& b);

// Euclidean distance between box centers.
double displacement(const BoundingBox& a, const BoundingBox& b);

BoundingBox union_box(const BoundingBox& a, const BoundingBox& b);

// Fraction of `subject` covered by `other`: area(subject∩other)/area(subject).
double containment(const BoundingBox& subject, const BoundingBox& other);

}  // namespace scenediff
