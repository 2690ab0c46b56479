#include "ctxaug/rle.hpp"

#include <numeric>

#include "ctxaug/error.hpp"

namespace ctxaug {

Mask decode_rle(const RleMask& rle) {
  const std::uint64_t total =
      std::accumulate(rle.counts.begin(), rle.counts.end(), std::uint64_t{0});
  const std::uint64_t expected = static_cast<std::uint64_t>(rle.height) * rle.width;
  if (rle.height < 0 || rle.width < 0 || total != expected) {
    throw IntegrityError("RLE runs sum to " + std::to_string(total) + ", expected " +
                         std::to_string(expected));
  }
  Mask m(rle.width, rle.height);
  std::uint64_t pos = 0;
  std::uint8_t value = 0;
  for (auto run : rle.counts) {
    for (std::uint32_t i = 0; i < run; ++i, ++pos) {
      const int x = static_cast<int>(pos / rle.height);
      const int y = static_cast<int>(pos % rle.height);
      m.at(x, y) = value;
    }
    value ^= 1;
  }
  return m;
}

RleMask encode_rle(const Mask& mask) {
  RleMask rle;
  rle.height = mask.height();
  rle.width = mask.width();
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = 0; y < mask.height(); ++y) {
      const std::uint8_t v = mask.at(x, y) ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

std::string rle_counts_to_string(const std::vector<std::uint32_t>& counts) {
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    long long x = counts[i];
    if (i > 2) x -= static_cast<long long>(counts[i - 2]);
    bool more = true;
    while (more) {
      char c = static_cast<char>(x & 0x1f);
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      s.push_back(static_cast<char>(c + 48));
    }
  }
  return s;
}

std::vector<std::uint32_t> rle_counts_from_string(std::string_view s) {
  std::vector<std::uint32_t> counts;
  std::size_t p = 0;
  while (p < s.size()) {
    long long x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= s.size()) throw ParseError("truncated RLE counts string", p);
      const int c = static_cast<unsigned char>(s[p]) - 48;
      if (c < 0 || c > 63) throw ParseError("invalid character in RLE counts string", p);
      x |= static_cast<long long>(c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= -1LL << (5 * k);
    }
    if (counts.size() > 2) x += counts[counts.size() - 2];
    if (x < 0 || x > 0xFFFFFFFFLL) throw ParseError("RLE run out of range", p);
    counts.push_back(static_cast<std::uint32_t>(x));
  }
  return counts;
}

}  // namespace ctxaug
