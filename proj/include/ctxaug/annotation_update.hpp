#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctxaug/dataset.hpp"

namespace ctxaug {

inline constexpr double kBoxDeleteIou = 0.8;
inline constexpr double kOcclusionDiscard = 0.8;

/// Indices (into the list before the update) of objects that were removed.
struct UpdateReport {
  std::vector<std::size_t> removed;
};

/// Appends the pasted object (tight box of `pasted_mask`, synthetic) and
/// deletes every prior object whose box has IoU > 0.8 with that box. Surviving
/// boxes keep their extent.
UpdateReport update_boxes(std::vector<ObjectAnnotation>& objects, const Mask& pasted_mask, int pasted_class);

/// Appends the pasted instance, removes every prior instance with more than
/// 80% of its pixels under the paste, and cuts the pasted pixels out of the
/// survivors, whose boxes are re-tightened.
UpdateReport update_instances(std::vector<ObjectAnnotation>& objects, const Mask& pasted_mask, int pasted_class);

/// Class of the owning instance per pixel, 0 elsewhere. Throws IntegrityError
/// when two masks overlap.
LabelMap instances_to_semantic(std::span<const ObjectAnnotation> objects, int width, int height);

/// One paste applied to a whole record: masked objects follow the occlusion
/// rule, mask-less ones the box rule, and the semantic map (if any) takes the
/// pasted class under the pasted pixels.
UpdateReport apply_paste(AnnotatedImage& image, const Mask& pasted_mask, int pasted_class);

}  // namespace ctxaug
