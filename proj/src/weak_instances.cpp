#include "ctxaug/weak_instances.hpp"

#include <numeric>

#include "ctxaug/error.hpp"

namespace ctxaug {

std::vector<ObjectAnnotation> approximate(const LabelMap& semantic, std::span<const ObjectAnnotation> boxes,
                                          Rng& rng) {
  const int w = semantic.width(), h = semantic.height();
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span(order));

  std::vector<ObjectAnnotation> out(boxes.begin(), boxes.end());
  for (auto& o : out) o.mask = Mask(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int label = semantic.at(x, y);
      if (label == 0) continue;
      const Point p{x + 0.5, y + 0.5};
      for (std::size_t k : order) {
        const auto& b = boxes[k];
        if (b.class_id == label && b.box.contains(p)) {
          out[k].mask->at(x, y) = 1;
          break;
        }
      }
    }
  }
  return out;
}

bool quality_filter(const ObjectAnnotation& object) {
  if (!object.mask) return false;
  const auto tb = tight_box(*object.mask);
  if (!tb) return false;
  return coverage(*tb, object.box) >= kWeakMinCoverage;
}

std::vector<AnnotatedImage> with_weak_masks(std::span<const AnnotatedImage> images, std::uint64_t seed) {
  std::vector<AnnotatedImage> out;
  out.reserve(images.size());
  for (const auto& img : images) {
    AnnotatedImage copy;
    copy.image_id = img.image_id;
    copy.pixels = img.pixels;
    copy.source = img.source;
    copy.semantic_map = img.semantic_map;
    std::vector<ObjectAnnotation> boxes;
    for (const auto& o : img.objects) {
      if (o.is_crowd) continue;
      if (o.mask)
        copy.objects.push_back(o);
      else if (img.semantic_map)
        boxes.push_back(o);
    }
    if (!boxes.empty()) {
      Rng rng = Rng::derive(seed, img.image_id, "weak-order");
      for (auto& o : approximate(*img.semantic_map, boxes, rng)) {
        if (!quality_filter(o)) continue;
        o.box = *tight_box(*o.mask);
        copy.objects.push_back(std::move(o));
      }
    }
    out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace ctxaug
