#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctxaug/dataset.hpp"
#include "ctxaug/geometry.hpp"
#include "ctxaug/rng.hpp"

namespace ctxaug {

/// A segmented object cut to its tight box: `pixels` and `mask` share that
/// extent.
struct InstanceCutout {
  int class_id = 0;
  RgbImage pixels;
  Mask mask;
  std::string source_image_id;
  std::size_t source_object = 0;
  ShapeParams original_shape;

  int width() const noexcept { return mask.width(); }
  int height() const noexcept { return mask.height(); }
};

class InstanceDatabase {
 public:
  static constexpr std::size_t kDefaultMinPixels = 100;

  InstanceDatabase() = default;
  explicit InstanceDatabase(std::vector<InstanceCutout> cutouts);

  std::size_t size() const noexcept { return cutouts_.size(); }
  bool empty() const noexcept { return cutouts_.empty(); }
  const InstanceCutout& operator[](std::size_t i) const { return cutouts_.at(i); }
  const std::vector<InstanceCutout>& cutouts() const noexcept { return cutouts_; }

  /// Indices of the cutouts of `class_id`; empty for unknown classes.
  std::span<const std::size_t> bucket(int class_id) const noexcept;
  /// Classes with at least one cutout, ascending.
  std::vector<int> classes() const;

 private:
  std::vector<InstanceCutout> cutouts_;
  std::vector<std::vector<std::size_t>> buckets_;  // indexed by class id
};

/// One cutout per non-crowd masked object with at least `min_pixels`
/// foreground pixels. Throws MissingMasks when no object carries a mask.
InstanceDatabase build_instance_db(std::span<const AnnotatedImage> images,
                                   std::size_t min_pixels = InstanceDatabase::kDefaultMinPixels);

struct ScaleRange {
  double lo = 0.5;
  double hi = 1.5;
};

/// Scale factors f for which an isotropically scaled w x h cutout fits inside
/// `candidate` and covers at least `min_coverage` of its area. nullopt when the
/// interval is empty.
std::optional<ScaleRange> admissible_scales(double cutout_w, double cutout_h, const Box& candidate,
                                            ScaleRange allowed = {}, double min_coverage = 0.8);

struct Match {
  std::size_t cutout_index = 0;
  double scale = 1.0;
  Box placement;  ///< scaled cutout extent, centred in the candidate
};

/// Uniform choice among the class bucket members admitting some factor, then
/// f uniform over that member's admissible interval. nullopt = no match.
std::optional<Match> match_cutout(const Box& candidate, int class_id, const InstanceDatabase& db, Rng& rng,
                                  ScaleRange allowed = {}, double min_coverage = 0.8);

/// On-disk cache: <dir>/<key>/index.json plus a pixel/mask PNG pair per cutout.
void save_instance_cache(const InstanceDatabase& db, const std::filesystem::path& dir, const std::string& key);
std::optional<InstanceDatabase> load_instance_cache(const std::filesystem::path& dir, const std::string& key);

}  // namespace ctxaug
