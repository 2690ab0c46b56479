#include "ctxaug/annotation_update.hpp"

#include <string>

#include "ctxaug/error.hpp"

namespace ctxaug {

namespace {

ObjectAnnotation pasted_object(const Mask& pasted_mask, int pasted_class) {
  const auto box = tight_box(pasted_mask);
  if (!box) throw PreconditionError("empty pasted mask");
  ObjectAnnotation o;
  o.class_id = pasted_class;
  o.box = *box;
  o.mask = pasted_mask;
  o.is_synthetic = true;
  return o;
}

std::size_t overlap(const Mask& a, const Mask& b) {
  std::size_t n = 0;
  const auto& da = a.data();
  const auto& db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) n += (da[i] != 0 && db[i] != 0);
  return n;
}

bool box_rule_deletes(const ObjectAnnotation& o, const Box& pasted) { return iou(o.box, pasted) > kBoxDeleteIou; }

/// Applies the occlusion rule to one masked object; false = drop it.
bool occlusion_rule_keeps(ObjectAnnotation& o, const Mask& pasted) {
  const Mask& m = *o.mask;
  if (m.width() != pasted.width() || m.height() != pasted.height())
    throw PreconditionError("instance mask and pasted mask differ in size");
  const std::size_t area = mask_area(m);
  if (area == 0) return false;
  const std::size_t hidden = overlap(m, pasted);
  if (static_cast<double>(hidden) > kOcclusionDiscard * static_cast<double>(area)) return false;
  if (hidden == 0) return true;
  Mask visible = m;
  auto dv = visible.data();
  const auto& dp = pasted.data();
  for (std::size_t i = 0; i < dv.size(); ++i)
    if (dp[i]) dv[i] = 0;
  o.box = *tight_box(visible);
  o.mask = std::move(visible);
  return true;
}

template <typename Keep>
UpdateReport filter_then_append(std::vector<ObjectAnnotation>& objects, ObjectAnnotation added, Keep keep) {
  UpdateReport r;
  std::vector<ObjectAnnotation> out;
  out.reserve(objects.size() + 1);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (keep(objects[i]))
      out.push_back(std::move(objects[i]));
    else
      r.removed.push_back(i);
  }
  out.push_back(std::move(added));
  objects = std::move(out);
  return r;
}

}  // namespace

UpdateReport update_boxes(std::vector<ObjectAnnotation>& objects, const Mask& pasted_mask, int pasted_class) {
  ObjectAnnotation added = pasted_object(pasted_mask, pasted_class);
  const Box pasted = added.box;
  return filter_then_append(objects, std::move(added),
                            [&](const ObjectAnnotation& o) { return !box_rule_deletes(o, pasted); });
}

UpdateReport update_instances(std::vector<ObjectAnnotation>& objects, const Mask& pasted_mask, int pasted_class) {
  for (const auto& o : objects)
    if (!o.mask) throw PreconditionError("update_instances needs masks on every object");
  return filter_then_append(objects, pasted_object(pasted_mask, pasted_class),
                            [&](ObjectAnnotation& o) { return occlusion_rule_keeps(o, pasted_mask); });
}

LabelMap instances_to_semantic(std::span<const ObjectAnnotation> objects, int width, int height) {
  LabelMap out(width, height);
  auto d = out.data();
  for (std::size_t k = 0; k < objects.size(); ++k) {
    const auto& o = objects[k];
    if (!o.mask) continue;
    if (o.mask->width() != width || o.mask->height() != height)
      throw PreconditionError("instance mask size differs from the map size");
    const auto& m = o.mask->data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!m[i]) continue;
      if (d[i] != 0)
        throw IntegrityError("instance masks overlap (object " + std::to_string(k) + ")", {std::to_string(k)});
      d[i] = static_cast<std::uint8_t>(o.class_id);
    }
  }
  return out;
}

UpdateReport apply_paste(AnnotatedImage& image, const Mask& pasted_mask, int pasted_class) {
  if (pasted_mask.width() != image.width() || pasted_mask.height() != image.height())
    throw PreconditionError("pasted mask size differs from the image");
  ObjectAnnotation added = pasted_object(pasted_mask, pasted_class);
  const Box pasted = added.box;
  UpdateReport r = filter_then_append(image.objects, std::move(added), [&](ObjectAnnotation& o) {
    return o.mask ? occlusion_rule_keeps(o, pasted_mask) : !box_rule_deletes(o, pasted);
  });
  if (image.semantic_map) {
    auto s = image.semantic_map->data();
    const auto& m = pasted_mask.data();
    for (std::size_t i = 0; i < s.size(); ++i)
      if (m[i]) s[i] = static_cast<std::uint8_t>(pasted_class);
  }
  return r;
}

}  // namespace ctxaug
