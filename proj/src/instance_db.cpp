#include "ctxaug/instance_db.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ctxaug/error.hpp"
#include "ctxaug/image_codec.hpp"
#include "ctxaug/image_ops.hpp"

namespace ctxaug {
namespace fs = std::filesystem;

InstanceDatabase::InstanceDatabase(std::vector<InstanceCutout> cutouts) : cutouts_(std::move(cutouts)) {
  for (std::size_t i = 0; i < cutouts_.size(); ++i) {
    const auto cls = static_cast<std::size_t>(cutouts_[i].class_id);
    if (buckets_.size() <= cls) buckets_.resize(cls + 1);
    buckets_[cls].push_back(i);
  }
}

std::span<const std::size_t> InstanceDatabase::bucket(int class_id) const noexcept {
  if (class_id < 0 || static_cast<std::size_t>(class_id) >= buckets_.size()) return {};
  return buckets_[static_cast<std::size_t>(class_id)];
}

std::vector<int> InstanceDatabase::classes() const {
  std::vector<int> out;
  for (std::size_t c = 0; c < buckets_.size(); ++c)
    if (!buckets_[c].empty()) out.push_back(static_cast<int>(c));
  return out;
}

InstanceDatabase build_instance_db(std::span<const AnnotatedImage> images, std::size_t min_pixels) {
  std::vector<InstanceCutout> cutouts;
  bool any_mask = false;
  for (const auto& img : images) {
    for (std::size_t i = 0; i < img.objects.size(); ++i) {
      const auto& o = img.objects[i];
      if (!o.mask) continue;
      any_mask = true;
      if (o.is_crowd) continue;
      auto rect = tight_rect(*o.mask);
      if (!rect) continue;
      Mask m = crop(*o.mask, *rect);
      if (mask_area(m) < min_pixels) continue;
      InstanceCutout c;
      c.class_id = o.class_id;
      c.pixels = crop(img.pixels, *rect);
      c.mask = std::move(m);
      c.source_image_id = img.image_id;
      c.source_object = i;
      c.original_shape = shape_params(Box::from_rect(*rect), img.width(), img.height());
      cutouts.push_back(std::move(c));
    }
  }
  if (!any_mask) throw MissingMasks("dataset has no instance masks; approximate them from semantic maps first");
  return InstanceDatabase(std::move(cutouts));
}

std::optional<ScaleRange> admissible_scales(double cutout_w, double cutout_h, const Box& candidate,
                                            ScaleRange allowed, double min_coverage) {
  const double cw = candidate.width(), ch = candidate.height();
  const double hi = std::min({allowed.hi, cw / cutout_w, ch / cutout_h});
  const double lo = std::max(allowed.lo, std::sqrt(min_coverage * cw * ch / (cutout_w * cutout_h)));
  if (lo > hi) return std::nullopt;
  return ScaleRange{lo, hi};
}

std::optional<Match> match_cutout(const Box& candidate, int class_id, const InstanceDatabase& db, Rng& rng,
                                  ScaleRange allowed, double min_coverage) {
  struct Option {
    std::size_t index;
    ScaleRange range;
  };
  std::vector<Option> options;
  for (std::size_t idx : db.bucket(class_id)) {
    const auto& c = db[idx];
    if (auto r = admissible_scales(c.width(), c.height(), candidate, allowed, min_coverage))
      options.push_back({idx, *r});
  }
  if (options.empty()) return std::nullopt;
  const Option& pick = options[rng.below(options.size())];
  const auto& c = db[pick.index];
  const double f = std::clamp(rng.uniform(pick.range.lo, pick.range.hi), pick.range.lo, pick.range.hi);
  const double w = std::min(f * c.width(), candidate.width());
  const double h = std::min(f * c.height(), candidate.height());
  return Match{pick.index, f, Box::from_center(candidate.center(), w, h)};
}

void save_instance_cache(const InstanceDatabase& db, const fs::path& dir, const std::string& key) {
  const fs::path root = dir / key;
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create cache dir " + root.string());
  nlohmann::json index = nlohmann::json::array();
  for (std::size_t i = 0; i < db.size(); ++i) {
    const auto& c = db[i];
    const std::string stem = "cutout_" + std::to_string(i);
    write_png(root / (stem + ".png"), c.pixels);
    LabelMap m(c.mask.width(), c.mask.height());
    std::copy(c.mask.data().begin(), c.mask.data().end(), m.data().begin());
    write_index_png(root / (stem + "_mask.png"), m);
    index.push_back({{"file", stem},
                     {"class_id", c.class_id},
                     {"source_image_id", c.source_image_id},
                     {"source_object", c.source_object},
                     {"scale", c.original_shape.scale},
                     {"aspect", c.original_shape.aspect}});
  }
  std::ofstream out(root / "index.json");
  out << nlohmann::json{{"key", key}, {"cutouts", index}}.dump(1) << "\n";
  if (!out) throw IoError("cannot write cache index");
}

std::optional<InstanceDatabase> load_instance_cache(const fs::path& dir, const std::string& key) {
  const fs::path root = dir / key;
  if (!fs::exists(root / "index.json")) return std::nullopt;
  std::ifstream in(root / "index.json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("instance cache index: " + std::string(e.what()), e.byte);
  }
  if (j.value("key", "") != key) return std::nullopt;
  std::vector<InstanceCutout> cutouts;
  for (const auto& e : j.at("cutouts")) {
    InstanceCutout c;
    const auto stem = e.at("file").get<std::string>();
    c.class_id = e.at("class_id").get<int>();
    c.source_image_id = e.at("source_image_id").get<std::string>();
    c.source_object = e.at("source_object").get<std::size_t>();
    c.original_shape = {e.at("scale").get<double>(), e.at("aspect").get<double>()};
    c.pixels = read_image(root / (stem + ".png"));
    const LabelMap m = read_index_png(root / (stem + "_mask.png"));
    c.mask = Mask(m.width(), m.height());
    std::copy(m.data().begin(), m.data().end(), c.mask.data().begin());
    if (c.mask.width() != c.pixels.width() || c.mask.height() != c.pixels.height())
      throw IntegrityError("cached cutout pixel/mask size mismatch", {stem});
    cutouts.push_back(std::move(c));
  }
  return InstanceDatabase(std::move(cutouts));
}

}  // namespace ctxaug
