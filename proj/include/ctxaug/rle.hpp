#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ctxaug/image.hpp"

namespace ctxaug {

/// COCO run-length mask: column-major runs alternating background/foreground,
/// starting with background (a leading 0 when the first pixel is set).
struct RleMask {
  std::vector<std::uint32_t> counts;
  int height = 0;
  int width = 0;

  bool operator==(const RleMask&) const = default;
};

/// Throws IntegrityError when the runs do not sum to height * width.
Mask decode_rle(const RleMask& rle);
RleMask encode_rle(const Mask& mask);

/// COCO compressed "counts" string (5-bit groups offset by '0', runs after the
/// second delta-coded against the run two places earlier).
std::string rle_counts_to_string(const std::vector<std::uint32_t>& counts);
/// Throws ParseError on a truncated or negative run.
std::vector<std::uint32_t> rle_counts_from_string(std::string_view s);

}  // namespace ctxaug
