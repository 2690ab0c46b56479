#include "ctxaug/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ctxaug {

Box Box::make(double x_min, double y_min, double x_max, double y_max) {
  if (!(x_min < x_max) || !(y_min < y_max) || !std::isfinite(x_min) ||
      !std::isfinite(y_min) || !std::isfinite(x_max) || !std::isfinite(y_max)) {
    std::ostringstream os;
    os << "invalid box (" << x_min << ", " << y_min << ", " << x_max << ", " << y_max << ")";
    throw PreconditionError(os.str());
  }
  return Box{x_min, y_min, x_max, y_max};
}

PixelRect Box::pixels() const noexcept {
  return {static_cast<int>(std::ceil(x_min - 0.5)), static_cast<int>(std::ceil(y_min - 0.5)),
          static_cast<int>(std::ceil(x_max - 0.5)), static_cast<int>(std::ceil(y_max - 0.5))};
}

std::ostream& operator<<(std::ostream& os, const Box& b) {
  return os << "(" << b.x_min << ", " << b.y_min << ", " << b.x_max << ", " << b.y_max << ")";
}

double intersection_area(const Box& a, const Box& b) noexcept {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  return (w > 0 && h > 0) ? w * h : 0.0;
}

double iou(const Box& a, const Box& b) noexcept {
  const double inter = intersection_area(a, b);
  return inter / (a.area() + b.area() - inter);
}

double coverage(const Box& inner, const Box& outer) noexcept {
  return intersection_area(inner, outer) / outer.area();
}

ShapeParams shape_params(const Box& box, int image_w, int image_h) {
  if (image_w <= 0 || image_h <= 0 || !box.inside(image_w, image_h)) {
    std::ostringstream os;
    os << "box " << box << " outside " << image_w << "x" << image_h << " image";
    throw PreconditionError(os.str());
  }
  const double image_area = static_cast<double>(image_w) * image_h;
  return {std::min(1.0, std::sqrt(box.area() / image_area)), box.width() / box.height()};
}

Box box_from_shape(ShapeParams p, Point center, int image_w, int image_h) {
  auto [w, h] = shape_extent(p, image_w, image_h);
  Box b{center.x - w / 2, center.y - h / 2, center.x + w / 2, center.y + h / 2};
  if (!(w > 0) || !(h > 0) || !b.inside(image_w, image_h)) {
    std::ostringstream os;
    os << "shape (" << p.scale << ", " << p.aspect << ") does not fit at (" << center.x << ", "
       << center.y << ") in " << image_w << "x" << image_h;
    throw NoFit(os.str());
  }
  // Absorb round-off so boxes that fit within tolerance stay inside the image.
  b.x_min = std::max(b.x_min, 0.0);
  b.y_min = std::max(b.y_min, 0.0);
  b.x_max = std::min(b.x_max, static_cast<double>(image_w));
  b.y_max = std::min(b.y_max, static_cast<double>(image_h));
  return b;
}

std::optional<PixelRect> tight_rect(const Mask& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y)) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 < 0) return std::nullopt;
  return PixelRect{x0, y0, x1 + 1, y1 + 1};
}

std::optional<Box> tight_box(const Mask& mask) {
  auto r = tight_rect(mask);
  if (!r) return std::nullopt;
  return Box::from_rect(*r);
}

std::optional<Box> clip_box(const Box& b, double w, double h) {
  const double x0 = std::max(b.x_min, 0.0), y0 = std::max(b.y_min, 0.0);
  const double x1 = std::min(b.x_max, w), y1 = std::min(b.y_max, h);
  if (!(x0 < x1) || !(y0 < y1)) return std::nullopt;
  return Box{x0, y0, x1, y1};
}

}  // namespace ctxaug
