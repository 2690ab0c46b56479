#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "ctxaug/dataset.hpp"
#include "ctxaug/rng.hpp"

namespace ctxaug::testing {

struct SceneOptions {
  int width = 96;
  int height = 96;
  int min_objects = 1;
  int max_objects = 3;
  int num_classes = 3;
  double min_side = 14.0;
  double max_side = 40.0;
  bool masks = true;
  bool semantic = false;
};

/// Pixels whose centre lies inside the ellipse inscribed in `box`.
Mask ellipse_mask(int width, int height, const Box& box);

Rgb class_colour(int class_id);

/// Textured background with elliptic objects painted in order; later objects
/// occlude earlier ones, masks stay disjoint and boxes tight.
AnnotatedImage random_scene(const std::string& id, Rng& rng, const SceneOptions& opts = {});

/// Categories c1..cn with original ids 1..n.
CategoryTable numbered_categories(int n);

/// n scenes with ids img0000, img0001, ...
Dataset scene_dataset(std::size_t n, std::uint64_t seed, const SceneOptions& opts = {});

/// Integer-cornered box inside [0, limit)^2 with sides in [1, max_side].
Box random_int_box(Rng& rng, int limit, int max_side);

Mask random_mask(Rng& rng, int width, int height, double density);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

/// SHA-256 over every file's relative path and bytes, in sorted order.
std::string tree_digest(const std::filesystem::path& dir);

}  // namespace ctxaug::testing
