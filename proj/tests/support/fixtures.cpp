#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <unistd.h>

#include "ctxaug/dataset_io.hpp"

namespace ctxaug::testing {

namespace fs = std::filesystem;

Mask ellipse_mask(int width, int height, const Box& box) {
  Mask m(width, height);
  const Point c = box.center();
  const double rx = box.width() / 2.0, ry = box.height() / 2.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = (x + 0.5 - c.x) / rx, dy = (y + 0.5 - c.y) / ry;
      if (dx * dx + dy * dy <= 1.0) m.at(x, y) = 1;
    }
  }
  return m;
}

Rgb class_colour(int class_id) {
  const auto c = static_cast<unsigned>(class_id);
  return {static_cast<std::uint8_t>(40 + (c * 97) % 200), static_cast<std::uint8_t>(30 + (c * 53) % 210),
          static_cast<std::uint8_t>(60 + (c * 151) % 180)};
}

AnnotatedImage random_scene(const std::string& id, Rng& rng, const SceneOptions& o) {
  AnnotatedImage img;
  img.image_id = id;
  img.pixels = RgbImage(o.width, o.height);
  const double gx = rng.uniform(-1.0, 1.0), gy = rng.uniform(-1.0, 1.0);
  const int base = static_cast<int>(rng.below(120)) + 60;
  for (int y = 0; y < o.height; ++y) {
    for (int x = 0; x < o.width; ++x) {
      const int noise = static_cast<int>(rng.below(17)) - 8;
      const int v = std::clamp(base + static_cast<int>(gx * x + gy * y) + noise, 0, 255);
      set_rgb(img.pixels, x, y,
              {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(std::clamp(v + 20, 0, 255)),
               static_cast<std::uint8_t>(std::clamp(v - 20, 0, 255))});
    }
  }
  const int count = o.min_objects + static_cast<int>(rng.below(static_cast<std::uint64_t>(o.max_objects - o.min_objects + 1)));
  std::vector<ObjectAnnotation> objects;
  for (int k = 0; k < count; ++k) {
    const double w = std::round(rng.uniform(o.min_side, o.max_side));
    const double h = std::round(rng.uniform(o.min_side, o.max_side));
    const double x0 = std::floor(rng.uniform(0.0, o.width - w));
    const double y0 = std::floor(rng.uniform(0.0, o.height - h));
    ObjectAnnotation obj;
    obj.class_id = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(o.num_classes)));
    const Box box = Box::make(x0, y0, x0 + w, y0 + h);
    Mask m = ellipse_mask(o.width, o.height, box);
    const Rgb col = class_colour(obj.class_id);
    for (int y = 0; y < o.height; ++y) {
      for (int x = 0; x < o.width; ++x) {
        if (!m.at(x, y)) continue;
        const int n = static_cast<int>(rng.below(11)) - 5;
        set_rgb(img.pixels, x, y,
                {static_cast<std::uint8_t>(std::clamp(col.r + n, 0, 255)),
                 static_cast<std::uint8_t>(std::clamp(col.g + n, 0, 255)),
                 static_cast<std::uint8_t>(std::clamp(col.b + n, 0, 255))});
        for (auto& prev : objects) prev.mask->at(x, y) = 0;
      }
    }
    obj.mask = std::move(m);
    objects.push_back(std::move(obj));
  }
  for (auto& obj : objects) {
    const auto tb = tight_box(*obj.mask);
    if (!tb) continue;
    obj.box = *tb;
    img.objects.push_back(std::move(obj));
  }
  if (o.semantic) {
    LabelMap sem(o.width, o.height);
    for (const auto& obj : img.objects)
      for (int y = 0; y < o.height; ++y)
        for (int x = 0; x < o.width; ++x)
          if (obj.mask->at(x, y)) sem.at(x, y) = static_cast<std::uint8_t>(obj.class_id);
    img.semantic_map = std::move(sem);
  }
  if (!o.masks)
    for (auto& obj : img.objects) obj.mask.reset();
  return img;
}

CategoryTable numbered_categories(int n) {
  CategoryTable t;
  for (int i = 1; i <= n; ++i) t.add(i, "c" + std::to_string(i));
  return t;
}

Dataset scene_dataset(std::size_t n, std::uint64_t seed, const SceneOptions& opts) {
  Dataset ds;
  ds.categories = numbered_categories(opts.num_classes);
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "img%04zu", i);
    Rng rng = Rng::derive(seed, id, "fixture");
    ds.images.push_back(random_scene(id, rng, opts));
  }
  return ds;
}

Box random_int_box(Rng& rng, int limit, int max_side) {
  const int w = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(max_side, limit))));
  const int h = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(max_side, limit))));
  const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(limit - w + 1)));
  const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(limit - h + 1)));
  return Box::make(x, y, x + w, y + h);
}

Mask random_mask(Rng& rng, int width, int height, double density) {
  Mask m(width, height);
  for (auto& v : m.data()) v = rng.uniform() < density ? 1 : 0;
  return m;
}

fs::path temp_dir(const std::string& name) {
  static int counter = 0;
  const fs::path p = fs::temp_directory_path() /
                     ("ctxaug_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string tree_digest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir));
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) {
    std::ifstream in(dir / f, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    all += f.generic_string();
    all.push_back('\0');
    all += sha256_hex(ss.str());
    all.push_back('\n');
  }
  return sha256_hex(all);
}

}  // namespace ctxaug::testing
