#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctxaug/geometry.hpp"
#include "ctxaug/image.hpp"

namespace ctxaug {

struct ObjectAnnotation {
  int class_id = 0;  ///< contiguous 1..C
  Box box;
  std::optional<Mask> mask;  ///< full-image binary mask when available
  bool is_synthetic = false;
  bool is_crowd = false;
};

/// One image with its annotations; the unit the pipeline augments.
struct AnnotatedImage {
  std::string image_id;
  RgbImage pixels;
  std::vector<ObjectAnnotation> objects;
  std::optional<LabelMap> semantic_map;
  std::string source;

  int width() const noexcept { return pixels.width(); }
  int height() const noexcept { return pixels.height(); }
};

struct Category {
  int id = 0;                 ///< contiguous id used everywhere internally
  long long original_id = 0;  ///< id in the source file (COCO) or list position (VOC)
  std::string name;
};

/// Contiguous class ids 1..C and the mapping back to source ids.
class CategoryTable {
 public:
  CategoryTable() = default;
  explicit CategoryTable(std::vector<Category> cats) : cats_(std::move(cats)) {}

  int num_classes() const noexcept { return static_cast<int>(cats_.size()); }
  const std::vector<Category>& all() const noexcept { return cats_; }
  const Category& at(int id) const { return cats_.at(static_cast<std::size_t>(id - 1)); }
  std::optional<int> find_original(long long original_id) const;
  std::optional<int> find_name(const std::string& name) const;
  int add(long long original_id, std::string name);

  bool operator==(const CategoryTable&) const = default;

 private:
  std::vector<Category> cats_;
};

struct Dataset {
  std::vector<AnnotatedImage> images;
  CategoryTable categories;
};

/// The standard 20 Pascal VOC class names, in index order.
const std::vector<std::string>& voc_class_names();

/// True when `img` satisfies the record invariants (boxes inside the image,
/// masks sized like the image, tight boxes for masked objects). Violations are
/// appended to `problems` when given.
bool check_image(const AnnotatedImage& img, int num_classes, std::vector<std::string>* problems = nullptr);

}  // namespace ctxaug
