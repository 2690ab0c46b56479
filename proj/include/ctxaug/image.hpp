#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ctxaug/error.hpp"

namespace ctxaug {

struct RgbTag {};
struct MaskTag {};
struct LabelTag {};

/// Dense row-major raster with interleaved channels. The tag keeps binary masks,
/// class-index maps and colour images from being mixed up at compile time.
template <typename T, int Channels, typename Tag>
class Raster {
 public:
  using value_type = T;
  static constexpr int channels = Channels;

  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(checked_size(width, height), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

  std::span<T> pixel(int x, int y) noexcept {
    return {data_.data() + index(x, y, 0), static_cast<std::size_t>(Channels)};
  }
  std::span<const T> pixel(int x, int y) const noexcept {
    return {data_.data() + index(x, y, 0), static_cast<std::size_t>(Channels)};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }

  bool operator==(const Raster&) const = default;

 private:
  static std::size_t checked_size(int width, int height) {
    if (width < 0 || height < 0) throw PreconditionError("negative raster size");
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * Channels;
  }
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * Channels + static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using RgbImage = Raster<std::uint8_t, 3, RgbTag>;
/// Binary mask, values 0 or 1.
using Mask = Raster<std::uint8_t, 1, MaskTag>;
/// Class-index map, 0 = background.
using LabelMap = Raster<std::uint8_t, 1, LabelTag>;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

inline void set_rgb(RgbImage& img, int x, int y, Rgb c) noexcept {
  auto p = img.pixel(x, y);
  p[0] = c.r;
  p[1] = c.g;
  p[2] = c.b;
}

inline Rgb get_rgb(const RgbImage& img, int x, int y) noexcept {
  auto p = img.pixel(x, y);
  return {p[0], p[1], p[2]};
}

inline std::size_t mask_area(const Mask& m) noexcept {
  std::size_t n = 0;
  for (auto v : m.data()) n += v != 0;
  return n;
}

}  // namespace ctxaug
