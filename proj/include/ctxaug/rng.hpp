#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <utility>

namespace ctxaug {

namespace detail {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_bytes(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return mix64(h);
}

}  // namespace detail

/// Counter-based random stream. Output i is a pure function of (key, i), so a
/// stream keyed on (seed, image id, purpose) yields the same numbers no matter
/// which worker or in what order the image is processed.
///
/// Distributions are implemented here rather than through <random> so results
/// are identical across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit Rng(std::uint64_t key = 0) noexcept : key_(detail::mix64(key ^ 0x6A09E667F3BCC909ULL)) {}

  static constexpr Rng derive(std::uint64_t seed, std::string_view stream,
                              std::string_view purpose) noexcept {
    std::uint64_t k = detail::mix64(seed + 0x9E3779B97F4A7C15ULL);
    k = detail::mix64(k ^ detail::hash_bytes(stream));
    k = detail::mix64(k ^ (detail::hash_bytes(purpose) + 0x3C6EF372FE94F82BULL));
    return Rng(k);
  }

  /// Independent child stream; does not advance this one.
  constexpr Rng fork(std::string_view tag) const noexcept {
    return Rng(detail::mix64(key_ ^ detail::hash_bytes(tag)));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return next(); }

  constexpr std::uint64_t next() noexcept {
    const std::uint64_t c = counter_++;
    return detail::mix64(detail::mix64(key_ + c * 0x9E3779B97F4A7C15ULL) ^ key_);
  }

  /// Uniform in [0, 1).
  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  constexpr double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer in [0, n). n must be > 0.
  constexpr std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

  template <typename T>
  constexpr void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ctxaug
