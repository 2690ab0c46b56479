#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <utility>

#include "ctxaug/image.hpp"

namespace ctxaug {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Integer pixel rectangle, half-open: columns [x0, x1), rows [y0, y1).
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
  bool operator==(const PixelRect&) const = default;
};

/// Axis-aligned box in continuous image coordinates (x right, y down).
/// Always satisfies x_min < x_max and y_min < y_max; use Box::make to validate
/// untrusted corners.
struct Box {
  double x_min = 0.0, y_min = 0.0, x_max = 1.0, y_max = 1.0;

  static Box make(double x_min, double y_min, double x_max, double y_max);
  static Box from_xywh(double x, double y, double w, double h) {
    return make(x, y, x + w, y + h);
  }
  static Box from_center(Point c, double w, double h) {
    return make(c.x - w / 2, c.y - h / 2, c.x + w / 2, c.y + h / 2);
  }
  static Box from_rect(const PixelRect& r) { return make(r.x0, r.y0, r.x1, r.y1); }

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }
  Point center() const noexcept { return {(x_min + x_max) / 2, (y_min + y_max) / 2}; }

  bool inside(double w, double h, double tol = 1e-9) const noexcept {
    return x_min >= -tol && y_min >= -tol && x_max <= w + tol && y_max <= h + tol;
  }
  /// Half-open: x_min <= x < x_max.
  bool contains(Point p) const noexcept { return p.x >= x_min && p.x < x_max && p.y >= y_min && p.y < y_max; }
  bool contains(const Box& o, double tol = 1e-9) const noexcept {
    return o.x_min >= x_min - tol && o.y_min >= y_min - tol &&
           o.x_max <= x_max + tol && o.y_max <= y_max + tol;
  }

  /// Pixels whose centres fall in [x_min, x_max) x [y_min, y_max).
  PixelRect pixels() const noexcept;

  bool operator==(const Box&) const = default;
};

std::ostream& operator<<(std::ostream& os, const Box& b);

struct ShapeParams {
  double scale = 1.0;   ///< sqrt(box area / image area)
  double aspect = 1.0;  ///< width / height
};

double intersection_area(const Box& a, const Box& b) noexcept;

double iou(const Box& a, const Box& b) noexcept;

/// area(inner ∩ outer) / area(outer). The denominator is the second argument.
double coverage(const Box& inner, const Box& outer) noexcept;

/// Throws PreconditionError when the box leaves the image.
ShapeParams shape_params(const Box& box, int image_w, int image_h);

/// Inverse of shape_params placed at `center`. Throws NoFit when the box would
/// leave the image.
Box box_from_shape(ShapeParams p, Point center, int image_w, int image_h);

/// Width and height of a shape in an image, without placement.
inline std::pair<double, double> shape_extent(ShapeParams p, int image_w, int image_h) {
  const double area = static_cast<double>(image_w) * image_h;
  return {p.scale * std::sqrt(area * p.aspect), p.scale * std::sqrt(area / p.aspect)};
}

/// Smallest box holding every foreground pixel; nullopt for an empty mask.
std::optional<Box> tight_box(const Mask& mask);
std::optional<PixelRect> tight_rect(const Mask& mask);

/// Intersection clipped to the image; nullopt when empty.
std::optional<Box> clip_box(const Box& b, double w, double h);

}  // namespace ctxaug

