#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ctxaug/dataset.hpp"
#include "ctxaug/rng.hpp"

namespace ctxaug {

inline constexpr double kWeakMinCoverage = 0.4;

/// Instance masks from a semantic map and class-labelled boxes. The boxes are
/// put in one random order; a pixel of class c goes to the first box in that
/// order that contains its centre and has class c. Returns the objects in
/// input order, each with its (possibly empty) mask and its box unchanged.
std::vector<ObjectAnnotation> approximate(const LabelMap& semantic, std::span<const ObjectAnnotation> boxes,
                                          Rng& rng);

/// True when the tight box of the mask covers at least 40% of the object's
/// box (inclusive). Empty or missing masks are dropped.
bool quality_filter(const ObjectAnnotation& object);

/// Copies of the images whose objects carry weak masks: approximated,
/// filtered, and snapped to the tight box of the kept mask. Images without a
/// semantic map keep only their already-masked objects. Order is derived from
/// (seed, image_id) only.
std::vector<AnnotatedImage> with_weak_masks(std::span<const AnnotatedImage> images, std::uint64_t seed);

}  // namespace ctxaug
