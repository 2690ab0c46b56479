#include "ctxaug/image_ops.hpp"

#include <limits>
#include <vector>

namespace ctxaug {

AlphaMap to_alpha(const Mask& m) {
  AlphaMap a(m.width(), m.height());
  auto src = m.data();
  auto dst = a.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 1.0f : 0.0f;
  return a;
}

AlphaMap gaussian_blur(const AlphaMap& src, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += kernel[i + radius];
  }
  for (auto& k : kernel) k /= sum;

  const int w = src.width(), h = src.height();
  std::vector<double> tmp(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int xx = x + i;
        if (xx >= 0 && xx < w) acc += kernel[i + radius] * src.at(xx, y);
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  AlphaMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int yy = y + i;
        if (yy >= 0 && yy < h) acc += kernel[i + radius] * tmp[static_cast<std::size_t>(yy) * w + x];
      }
      out.at(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

namespace {

// Exact 1D squared distance transform (Felzenszwalb & Huttenlocher).
void edt_1d(const std::vector<double>& f, std::vector<double>& d) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == inf) continue;
    if (f[v[k]] == inf) {
      v[k] = q;
      continue;
    }
    double s;
    for (;;) {
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
      if (s > z[k] || k == 0) break;
      --k;
    }
    if (s <= z[k]) {
      v[k] = q;
      z[k + 1] = inf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double diff = q - v[k];
    d[q] = f[v[k]] == inf ? inf : diff * diff + f[v[k]];
  }
}

}  // namespace

AlphaMap distance_to_background(const Mask& m) {
  // One pixel of background padding on every side.
  const int w = m.width() + 2, h = m.height() + 2;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> grid(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.at(x, y)) grid[static_cast<std::size_t>(y + 1) * w + x + 1] = inf;

  std::vector<double> f, d;
  f.resize(h);
  d.resize(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
    edt_1d(f, d);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  f.resize(w);
  d.resize(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = grid[static_cast<std::size_t>(y) * w + x];
    edt_1d(f, d);
    for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * w + x] = d[x];
  }
  AlphaMap out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      out.at(x, y) = static_cast<float>(std::sqrt(grid[static_cast<std::size_t>(y + 1) * w + x + 1]));
  return out;
}

RgbImage motion_blur(const RgbImage& src, int length, double angle) {
  const int w = src.width(), h = src.height();
  RgbImage out(w, h);
  if (w == 0 || h == 0) return out;
  const double dx = std::cos(angle), dy = std::sin(angle);
  const int half = length / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc[3] = {0, 0, 0};
      for (int t = -half; t <= half; ++t) {
        const double fx = std::clamp(x + t * dx, 0.0, w - 1.0);
        const double fy = std::clamp(y + t * dy, 0.0, h - 1.0);
        const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
        const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
        const double wx = fx - x0, wy = fy - y0;
        for (int c = 0; c < 3; ++c) {
          const double top = src.at(x0, y0, c) + (src.at(x1, y0, c) - src.at(x0, y0, c)) * wx;
          const double bot = src.at(x0, y1, c) + (src.at(x1, y1, c) - src.at(x0, y1, c)) * wx;
          acc[c] += top + (bot - top) * wy;
        }
      }
      const int taps = 2 * half + 1;
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = detail::store<std::uint8_t>(acc[c] / taps);
    }
  }
  return out;
}

void draw_rect(RgbImage& img, const PixelRect& r, Rgb colour, int thickness) {
  for (int t = 0; t < thickness; ++t) {
    const int x0 = r.x0 + t, y0 = r.y0 + t, x1 = r.x1 - 1 - t, y1 = r.y1 - 1 - t;
    if (x1 < x0 || y1 < y0) return;
    for (int x = x0; x <= x1; ++x) {
      if (img.contains(x, y0)) set_rgb(img, x, y0, colour);
      if (img.contains(x, y1)) set_rgb(img, x, y1, colour);
    }
    for (int y = y0; y <= y1; ++y) {
      if (img.contains(x0, y)) set_rgb(img, x0, y, colour);
      if (img.contains(x1, y)) set_rgb(img, x1, y, colour);
    }
  }
}

RgbImage hconcat(const RgbImage& a, const RgbImage& b) {
  RgbImage out(a.width() + b.width(), std::max(a.height(), b.height()));
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) set_rgb(out, x, y, get_rgb(a, x, y));
  for (int y = 0; y < b.height(); ++y)
    for (int x = 0; x < b.width(); ++x) set_rgb(out, a.width() + x, y, get_rgb(b, x, y));
  return out;
}

}  // namespace ctxaug
