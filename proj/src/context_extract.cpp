#include "ctxaug/context_extract.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "ctxaug/error.hpp"
#include "ctxaug/image_ops.hpp"

namespace ctxaug {

namespace {

PixelRect outward_rect(const Box& b, int w, int h) {
  return {std::max(0, static_cast<int>(std::floor(b.x_min))), std::max(0, static_cast<int>(std::floor(b.y_min))),
          std::min(w, static_cast<int>(std::ceil(b.x_max))), std::min(h, static_cast<int>(std::ceil(b.y_max)))};
}

double source_coord(double lo, double extent, int o) {
  return lo + (o + 0.5) * extent / kContextSize;
}

}  // namespace

bool maps_inside_box(const ContextualImage& ci, int x, int y) noexcept {
  const double sx = source_coord(ci.neighborhood.x_min, ci.neighborhood.width(), x);
  const double sy = source_coord(ci.neighborhood.y_min, ci.neighborhood.height(), y);
  return sx > ci.source_box.x_min && sx < ci.source_box.x_max && sy > ci.source_box.y_min &&
         sy < ci.source_box.y_max;
}

ContextualImage contextual_geometry(const AnnotatedImage& image, const Box& box, Rng& rng,
                                    const ContextOptions& opts) {
  const int w = image.width(), h = image.height();
  if (!box.inside(w, h)) throw PreconditionError("contextual box outside image");
  const double g = rng.uniform(opts.min_enlarge, opts.max_enlarge);
  const Box grown = Box::from_center(box.center(), box.width() * g, box.height() * g);
  ContextualImage ci;
  ci.source_box = box;
  ci.neighborhood = Box::from_rect(outward_rect(*clip_box(grown, w, h), w, h));
  ci.image_id = image.image_id;
  return ci;
}

ContextualImage make_contextual(const AnnotatedImage& image, const Box& box, Rng& rng, const ContextOptions& opts) {
  ContextualImage ci = contextual_geometry(image, box, rng, opts);
  const int w = image.width(), h = image.height();
  const PixelRect region = ci.neighborhood.pixels();
  RgbImage patch = crop(image.pixels, region);
  const PixelRect hole = outward_rect(box, w, h);
  for (int y = hole.y0; y < hole.y1; ++y)
    for (int x = hole.x0; x < hole.x1; ++x) set_rgb(patch, x - region.x0, y - region.y0, kContextFill);

  ci.pixels = resize_bilinear(patch, kContextSize, kContextSize);
  // maps_inside_box is separable: an inside row range times an inside column range
  int x0 = kContextSize, x1 = 0, y0 = kContextSize, y1 = 0;
  for (int i = 0; i < kContextSize; ++i) {
    const double sx = source_coord(ci.neighborhood.x_min, ci.neighborhood.width(), i);
    const double sy = source_coord(ci.neighborhood.y_min, ci.neighborhood.height(), i);
    if (sx > box.x_min && sx < box.x_max) x0 = std::min(x0, i), x1 = i + 1;
    if (sy > box.y_min && sy < box.y_max) y0 = std::min(y0, i), y1 = i + 1;
  }
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) set_rgb(ci.pixels, x, y, kContextFill);
  return ci;
}

std::vector<Box> sample_background_boxes(const AnnotatedImage& image, const ShapeHistogram& hist, std::size_t count,
                                         const TrainingSetOptions& opts, Rng& rng) {
  std::vector<Box> out;
  const std::size_t budget = count * static_cast<std::size_t>(opts.tries_per_background);
  for (std::size_t tries = 0; out.size() < count && tries < budget; ++tries) {
    Box b;
    try {
      b = sample_box(hist, image.width(), image.height(), rng, 1);
    } catch (const NoFit&) {
      continue;
    }
    const bool clear = std::all_of(image.objects.begin(), image.objects.end(),
                                   [&](const ObjectAnnotation& o) { return iou(o.box, b) < opts.max_bg_iou; });
    if (clear) out.push_back(b);
  }
  if (out.size() < count)
    spdlog::warn("{}: only {} of {} background boxes accepted", image.image_id, out.size(), count);
  return out;
}

std::vector<ContextualImage> contextual_examples(const AnnotatedImage& image, const ShapeHistogram& hist,
                                                 const TrainingSetOptions& opts, Rng& rng) {
  std::vector<ContextualImage> out;
  std::size_t positives = 0;
  for (const auto& o : image.objects) {
    if (o.is_crowd) continue;
    auto ci = make_contextual(image, o.box, rng, opts.context);
    ci.label = o.class_id;
    out.push_back(std::move(ci));
    ++positives;
  }
  const auto wanted = positives > 0
                          ? static_cast<std::size_t>(std::llround(opts.bg_ratio * static_cast<double>(positives)))
                          : static_cast<std::size_t>(opts.backgrounds_per_empty_image);
  for (const Box& b : sample_background_boxes(image, hist, wanted, opts, rng)) {
    auto ci = make_contextual(image, b, rng, opts.context);
    ci.label = 0;
    out.push_back(std::move(ci));
  }
  return out;
}

void gen_training_set(std::span<const AnnotatedImage> images, const ShapeHistogram& hist,
                      const TrainingSetOptions& opts, std::uint64_t seed,
                      const std::function<void(ContextualImage&&)>& sink) {
  for (const auto& img : images) {
    Rng rng = Rng::derive(seed, img.image_id, "context-set");
    for (auto& ci : contextual_examples(img, hist, opts, rng)) sink(std::move(ci));
  }
}

}  // namespace ctxaug
