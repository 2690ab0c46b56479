#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ctxaug/dataset.hpp"
#include "ctxaug/geometry.hpp"
#include "ctxaug/rng.hpp"
#include "ctxaug/shape_model.hpp"

namespace ctxaug {

inline constexpr int kContextSize = 300;
inline constexpr Rgb kContextFill{128, 128, 128};

/// Neighbourhood crop around a box with the box interior masked out, resized
/// to kContextSize squared. `label` is 0 for background examples.
struct ContextualImage {
  RgbImage pixels;
  int label = 0;
  Box source_box;
  Box neighborhood;
  std::string image_id;
};

struct ContextOptions {
  double min_enlarge = 1.5;
  double max_enlarge = 3.0;
};

/// The neighbourhood is the box scaled about its centre by g ~ U[min, max],
/// clipped to the image and snapped outward to whole pixels. Every pixel the
/// box touches is filled before resampling, and every output pixel whose
/// source location lies strictly inside the box is the fill colour.
ContextualImage make_contextual(const AnnotatedImage& image, const Box& box, Rng& rng,
                                const ContextOptions& opts = {});

/// make_contextual without the raster: the same RNG draw and neighbourhood,
/// `pixels` left empty.
ContextualImage contextual_geometry(const AnnotatedImage& image, const Box& box, Rng& rng,
                                    const ContextOptions& opts = {});

/// Fill-colour test used by the invariant checks: does output pixel (x, y) of
/// `ci` map back to a location strictly inside its source box?
bool maps_inside_box(const ContextualImage& ci, int x, int y) noexcept;

struct TrainingSetOptions {
  double bg_ratio = 3.0;
  double max_bg_iou = 0.2;
  int tries_per_background = 50;
  /// Backgrounds drawn for images without any ground truth.
  int backgrounds_per_empty_image = 0;
  ContextOptions context;
};

/// Background boxes for one image: shapes from `hist`, accepted when their IoU
/// with every ground-truth box is below opts.max_bg_iou. May return fewer than
/// `count` (a warning is logged).
std::vector<Box> sample_background_boxes(const AnnotatedImage& image, const ShapeHistogram& hist,
                                         std::size_t count, const TrainingSetOptions& opts, Rng& rng);

/// Positives (one per non-crowd GT box, labelled with its class) followed by
/// round(bg_ratio * positives) backgrounds for one image.
std::vector<ContextualImage> contextual_examples(const AnnotatedImage& image, const ShapeHistogram& hist,
                                                 const TrainingSetOptions& opts, Rng& rng);

/// Streams examples for every image in order; each image uses its own stream
/// derived from (seed, image_id), so shards reproduce the same output.
void gen_training_set(std::span<const AnnotatedImage> images, const ShapeHistogram& hist,
                      const TrainingSetOptions& opts, std::uint64_t seed,
                      const std::function<void(ContextualImage&&)>& sink);

}  // namespace ctxaug
