#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <type_traits>
#include <vector>

#include "ctxaug/geometry.hpp"
#include "ctxaug/image.hpp"

namespace ctxaug {

struct AlphaTag {};
/// Floating-point single-channel plane (alpha, distances).
using AlphaMap = Raster<float, 1, AlphaTag>;

namespace detail {

template <typename T>
T store(double v) {
  if constexpr (std::is_integral_v<T>) {
    constexpr double hi = std::numeric_limits<T>::max();
    // half away from zero, as lround, for the clamped non-negative range
    return static_cast<T>(std::clamp(v, 0.0, hi) + 0.5);
  } else {
    return static_cast<T>(v);
  }
}

}  // namespace detail

/// Bilinear resampling of `region` of `src` into a w x h raster. Pixel centres
/// sit at half-integers; reads outside the region clamp to its border. Equal
/// sizes reproduce the region exactly.
template <typename T, int C, typename Tag>
Raster<T, C, Tag> resize_bilinear(const Raster<T, C, Tag>& src, const PixelRect& region, int w,
                                  int h) {
  Raster<T, C, Tag> out(w, h);
  if (region.empty() || w == 0 || h == 0) return out;
  const double sx = static_cast<double>(region.width()) / w;
  const double sy = static_cast<double>(region.height()) / h;
  std::vector<int> xs0(static_cast<std::size_t>(w)), xs1(static_cast<std::size_t>(w));
  std::vector<double> wxs(static_cast<std::size_t>(w));
  for (int ox = 0; ox < w; ++ox) {
    const double fx = std::clamp((ox + 0.5) * sx - 0.5, 0.0, region.width() - 1.0);
    const int x0 = static_cast<int>(fx);
    xs0[ox] = (region.x0 + x0) * C;
    xs1[ox] = (region.x0 + std::min(x0 + 1, region.width() - 1)) * C;
    wxs[ox] = fx - x0;
  }
  const std::size_t stride = static_cast<std::size_t>(src.width()) * C;
  const T* base = src.data().data();
  T* dst = out.data().data();
  for (int oy = 0; oy < h; ++oy) {
    const double fy = std::clamp((oy + 0.5) * sy - 0.5, 0.0, region.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, region.height() - 1);
    const double wy = fy - y0;
    const T* row0 = base + static_cast<std::size_t>(region.y0 + y0) * stride;
    const T* row1 = base + static_cast<std::size_t>(region.y0 + y1) * stride;
    for (int ox = 0; ox < w; ++ox) {
      const double wx = wxs[ox];
      for (int c = 0; c < C; ++c) {
        const double a = row0[xs0[ox] + c];
        const double b = row0[xs1[ox] + c];
        const double d = row1[xs0[ox] + c];
        const double e = row1[xs1[ox] + c];
        const double top = a + (b - a) * wx;
        const double bottom = d + (e - d) * wx;
        *dst++ = detail::store<T>(top + (bottom - top) * wy);
      }
    }
  }
  return out;
}

template <typename T, int C, typename Tag>
Raster<T, C, Tag> resize_bilinear(const Raster<T, C, Tag>& src, int w, int h) {
  return resize_bilinear(src, PixelRect{0, 0, src.width(), src.height()}, w, h);
}

template <typename T, int C, typename Tag>
Raster<T, C, Tag> crop(const Raster<T, C, Tag>& src, const PixelRect& r) {
  Raster<T, C, Tag> out(r.width(), r.height());
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x)
      for (int c = 0; c < C; ++c) out.at(x, y, c) = src.at(r.x0 + x, r.y0 + y, c);
  return out;
}

AlphaMap to_alpha(const Mask& m);

/// Convolution with a normalised Gaussian truncated at 3 sigma; zero outside.
AlphaMap gaussian_blur(const AlphaMap& src, double sigma);

/// Euclidean distance from each foreground pixel centre to the nearest
/// background pixel centre (pixels beyond the raster count as background).
/// Background pixels get 0.
AlphaMap distance_to_background(const Mask& m);

/// Whole-image blur with a line kernel of `length` taps centred on each pixel,
/// oriented at `angle` radians; taps are bilinear, edges clamp.
RgbImage motion_blur(const RgbImage& src, int length, double angle);

/// Axis-aligned rectangle outline, clipped to the image.
void draw_rect(RgbImage& img, const PixelRect& r, Rgb colour, int thickness = 1);

/// Two images side by side (heights padded with black).
RgbImage hconcat(const RgbImage& a, const RgbImage& b);

}  // namespace ctxaug
