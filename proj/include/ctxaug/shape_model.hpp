#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxaug/dataset.hpp"
#include "ctxaug/geometry.hpp"
#include "ctxaug/rng.hpp"

namespace ctxaug {

/// Joint histogram of ground-truth box shapes: scale bins are uniform over
/// (0, 1], aspect bins uniform in log2(aspect) over [-3, 3] (aspects outside
/// are clipped to the end bins).
class ShapeHistogram {
 public:
  static constexpr int kDefaultBins = 16;
  static constexpr double kLogAspectRange = 3.0;

  explicit ShapeHistogram(int scale_bins = kDefaultBins, int aspect_bins = kDefaultBins);

  int scale_bins() const noexcept { return static_cast<int>(scale_edges_.size()) - 1; }
  int aspect_bins() const noexcept { return static_cast<int>(log_aspect_edges_.size()) - 1; }
  const std::vector<double>& scale_edges() const noexcept { return scale_edges_; }
  /// Edges in log2(aspect).
  const std::vector<double>& log_aspect_edges() const noexcept { return log_aspect_edges_; }
  std::uint64_t count(int scale_bin, int aspect_bin) const {
    return counts_.at(static_cast<std::size_t>(scale_bin) * aspect_bins() + aspect_bin);
  }
  std::uint64_t total() const noexcept { return total_; }

  /// Flat bin index (scale-major) holding `p`.
  int bin_of(ShapeParams p) const noexcept;
  double probability(int flat_bin) const;

  void add(ShapeParams p);

  /// Bin drawn with probability count/total, then (scale, aspect) uniform
  /// inside it, aspect uniform in log space. Requires total() > 0.
  ShapeParams sample_shape(Rng& rng) const;

  nlohmann::json to_json() const;
  static ShapeHistogram from_json(const nlohmann::json& j);

  bool operator==(const ShapeHistogram&) const = default;

 private:
  std::vector<double> scale_edges_;
  std::vector<double> log_aspect_edges_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// One count per non-crowd ground-truth box. Throws EmptyDistribution when the
/// dataset has no boxes.
ShapeHistogram fit_shapes(std::span<const AnnotatedImage> images,
                          int scale_bins = ShapeHistogram::kDefaultBins,
                          int aspect_bins = ShapeHistogram::kDefaultBins);

/// A box with a shape drawn from `hist`, centred uniformly over the positions
/// where it fits. Shapes that cannot fit are redrawn; NoFit after `max_tries`.
Box sample_box(const ShapeHistogram& hist, int image_w, int image_h, Rng& rng, int max_tries = 100);

}  // namespace ctxaug
