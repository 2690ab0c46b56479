#include "ctxaug/dataset.hpp"

#include <cmath>
#include <sstream>

namespace ctxaug {

std::optional<int> CategoryTable::find_original(long long original_id) const {
  for (const auto& c : cats_)
    if (c.original_id == original_id) return c.id;
  return std::nullopt;
}

std::optional<int> CategoryTable::find_name(const std::string& name) const {
  for (const auto& c : cats_)
    if (c.name == name) return c.id;
  return std::nullopt;
}

int CategoryTable::add(long long original_id, std::string name) {
  const int id = num_classes() + 1;
  cats_.push_back({id, original_id, std::move(name)});
  return id;
}

const std::vector<std::string>& voc_class_names() {
  static const std::vector<std::string> names = {
      "aeroplane", "bicycle", "bird",  "boat",      "bottle", "bus",         "car",
      "cat",       "chair",   "cow",   "diningtable", "dog",  "horse",       "motorbike",
      "person",    "pottedplant", "sheep", "sofa",  "train",  "tvmonitor"};
  return names;
}

bool check_image(const AnnotatedImage& img, int num_classes, std::vector<std::string>* problems) {
  bool ok = true;
  auto report = [&](std::size_t i, const std::string& what) {
    ok = false;
    if (problems) {
      std::ostringstream os;
      os << img.image_id << " object " << i << ": " << what;
      problems->push_back(os.str());
    }
  };
  for (std::size_t i = 0; i < img.objects.size(); ++i) {
    const auto& o = img.objects[i];
    if (o.class_id < 1 || o.class_id > num_classes) report(i, "class id out of range");
    if (!o.box.inside(img.width(), img.height())) report(i, "box outside image");
    if (o.mask) {
      if (o.mask->width() != img.width() || o.mask->height() != img.height()) {
        report(i, "mask size differs from image");
        continue;
      }
      auto tb = tight_box(*o.mask);
      if (!tb) {
        report(i, "empty mask");
      } else if (std::abs(tb->x_min - o.box.x_min) > 1e-6 || std::abs(tb->y_min - o.box.y_min) > 1e-6 ||
                 std::abs(tb->x_max - o.box.x_max) > 1e-6 || std::abs(tb->y_max - o.box.y_max) > 1e-6) {
        report(i, "box is not the tight box of its mask");
      }
    }
  }
  if (img.semantic_map) {
    if (img.semantic_map->width() != img.width() || img.semantic_map->height() != img.height()) {
      ok = false;
      if (problems) problems->push_back(img.image_id + ": semantic map size differs from image");
    } else {
      for (auto v : img.semantic_map->data()) {
        if (v > num_classes) {
          ok = false;
          if (problems) problems->push_back(img.image_id + ": semantic label out of range");
          break;
        }
      }
    }
  }
  return ok;
}

}  // namespace ctxaug
