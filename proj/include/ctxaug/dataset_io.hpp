#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxaug/dataset.hpp"
#include "ctxaug/rle.hpp"

namespace ctxaug {

enum class DatasetFormat { coco, voc };

DatasetFormat parse_format(const std::string& s);
std::string to_string(DatasetFormat f);

/// Rasterises COCO polygons (flat x,y lists, even-odd rule, sampled at pixel
/// centres) into one binary mask.
Mask rasterize_polygons(const std::vector<std::vector<double>>& polygons, int width, int height);

/// Loads a COCO-style annotation file. Image files are resolved against
/// `image_root`. Category ids become 1..C in the order of the categories array.
/// A provenance sidecar next to the JSON (provenance.json) restores synthetic
/// flags.
Dataset load_coco(const std::filesystem::path& json_path, const std::filesystem::path& image_root);

struct VocPaths {
  std::filesystem::path xml_dir;
  std::filesystem::path image_dir;
  std::optional<std::filesystem::path> seg_class_dir;
  std::optional<std::filesystem::path> seg_object_dir;

  /// Standard layout under a VOC root: Annotations/, JPEGImages/, and the
  /// Segmentation{Class,Object}/ directories when they exist.
  static VocPaths from_root(const std::filesystem::path& root);
};

/// Loads VOC XML (+ optional index PNGs). `class_names` fixes the id order;
/// names not in the list are appended in order of first appearance.
Dataset load_voc(const VocPaths& paths,
                 const std::vector<std::string>& class_names = voc_class_names());

/// Snaps masked boxes to their mask tight box (warning when off by > 2px),
/// drops empty masks, clips boxes to the image.
void normalize_objects(AnnotatedImage& img);

struct Manifest {
  std::vector<std::string> files;  ///< relative to the output directory, sorted
  CategoryTable categories;
  std::uint64_t seed = 0;
  std::string config_hash;
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Streams images to disk as they are produced; annotation files, the
/// provenance sidecar and manifest.json are written by finish(). Everything is
/// staged in `<out_dir>.partial` and moved into place on success, so an
/// aborted run leaves no half-written dataset behind.
class DatasetWriter {
 public:
  DatasetWriter(DatasetFormat format, std::filesystem::path out_dir, CategoryTable categories,
                bool overwrite = false);
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  void add(const AnnotatedImage& img);
  Manifest finish(std::uint64_t seed = 0, std::string config_hash = {},
                  nlohmann::json extra = nlohmann::json::object());
  /// Removes the staging directory. Called by the destructor when finish() was
  /// never reached.
  void abort() noexcept;

  const std::filesystem::path& staging_dir() const noexcept { return staging_; }

 private:
  DatasetFormat format_;
  std::filesystem::path out_dir_;
  std::filesystem::path staging_;
  CategoryTable categories_;
  bool done_ = false;
  std::vector<std::string> files_;
  nlohmann::json coco_images_ = nlohmann::json::array();
  nlohmann::json coco_annotations_ = nlohmann::json::array();
  nlohmann::json provenance_ = nlohmann::json::object();
  long long next_ann_id_ = 1;
};

Manifest write_dataset(const Dataset& ds, DatasetFormat format, const std::filesystem::path& out_dir,
                       bool overwrite = false);

/// Loads a dataset previously emitted by write_dataset (either format).
Dataset load_written(const std::filesystem::path& dir, DatasetFormat format);

/// SHA-256 (hex) over ids, pixels and annotations; keys on-disk caches.
std::string content_hash(const Dataset& ds);

std::string sha256_hex(std::string_view bytes);

}  // namespace ctxaug
