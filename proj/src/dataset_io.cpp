#include "ctxaug/dataset_io.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ctxaug/error.hpp"
#include "ctxaug/image_codec.hpp"

namespace ctxaug {
namespace fs = std::filesystem;
using nlohmann::json;

DatasetFormat parse_format(const std::string& s) {
  if (s == "coco") return DatasetFormat::coco;
  if (s == "voc") return DatasetFormat::voc;
  throw ConfigError("unknown dataset format '" + s + "' (expected coco or voc)");
}

std::string to_string(DatasetFormat f) { return f == DatasetFormat::coco ? "coco" : "voc"; }

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + p.string());
}

void apply_provenance(Dataset& ds, const fs::path& sidecar) {
  if (!fs::exists(sidecar)) return;
  json j;
  try {
    j = json::parse(read_file(sidecar));
  } catch (const json::parse_error& e) {
    throw ParseError(sidecar.string() + ": " + e.what(), e.byte);
  }
  const auto& synthetic = j.value("synthetic", json::object());
  for (auto& img : ds.images) {
    auto it = synthetic.find(img.image_id);
    if (it == synthetic.end()) continue;
    for (const auto& idx : *it) {
      const auto i = idx.get<std::size_t>();
      if (i >= img.objects.size())
        throw IntegrityError("provenance refers to missing object", {img.image_id});
      img.objects[i].is_synthetic = true;
    }
  }
}

fs::path resolve_image(const fs::path& dir, const std::string& file_name, const std::string& stem) {
  fs::path p = dir / file_name;
  if (fs::exists(p)) return p;
  for (const char* ext : {".jpg", ".png", ".jpeg", ".JPG", ".PNG"}) {
    fs::path alt = dir / (stem + ext);
    if (fs::exists(alt)) return alt;
  }
  throw IoError("image file not found: " + p.string());
}

Mask decode_segmentation(const json& seg, int width, int height, const std::string& ann_id) {
  if (seg.is_array()) {
    std::vector<std::vector<double>> polys;
    for (const auto& poly : seg) {
      if (!poly.is_array()) throw UnsupportedMask("polygon entry is not an array", ann_id);
      polys.push_back(poly.get<std::vector<double>>());
    }
    return rasterize_polygons(polys, width, height);
  }
  if (seg.is_object() && seg.contains("counts") && seg.contains("size")) {
    RleMask rle;
    const auto size = seg["size"].get<std::vector<int>>();
    if (size.size() != 2) throw UnsupportedMask("RLE size must be [h, w]", ann_id);
    rle.height = size[0];
    rle.width = size[1];
    if (seg["counts"].is_array()) {
      rle.counts = seg["counts"].get<std::vector<std::uint32_t>>();
    } else if (seg["counts"].is_string()) {
      rle.counts = rle_counts_from_string(seg["counts"].get<std::string>());
    } else {
      throw UnsupportedMask("RLE counts must be a list or a string", ann_id);
    }
    if (rle.height != height || rle.width != width)
      throw IntegrityError("RLE size differs from image size", {ann_id});
    return decode_rle(rle);
  }
  throw UnsupportedMask("unsupported segmentation payload in annotation " + ann_id, ann_id);
}

}  // namespace

Mask rasterize_polygons(const std::vector<std::vector<double>>& polygons, int width, int height) {
  Mask m(width, height);
  std::vector<double> xs;
  for (const auto& poly : polygons) {
    const std::size_t n = poly.size() / 2;
    if (n < 3) continue;
    for (int y = 0; y < height; ++y) {
      const double yc = y + 0.5;
      xs.clear();
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double xi = poly[2 * i], yi = poly[2 * i + 1];
        const double xj = poly[2 * j], yj = poly[2 * j + 1];
        if ((yi > yc) != (yj > yc)) xs.push_back(xi + (yc - yi) * (xj - xi) / (yj - yi));
      }
      std::sort(xs.begin(), xs.end());
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        const int x0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
        const int x1 = std::min(width, static_cast<int>(std::ceil(xs[k + 1] - 0.5)));
        for (int x = x0; x < x1; ++x) m.at(x, y) = 1;
      }
    }
  }
  return m;
}

void normalize_objects(AnnotatedImage& img) {
  std::vector<ObjectAnnotation> kept;
  kept.reserve(img.objects.size());
  for (std::size_t i = 0; i < img.objects.size(); ++i) {
    auto& o = img.objects[i];
    if (o.mask && !tight_box(*o.mask)) {
      spdlog::warn("{}: object {} has an empty mask; mask dropped", img.image_id, i);
      o.mask.reset();
    }
    if (o.mask) {
      const Box tb = *tight_box(*o.mask);
      const double dev = std::max({std::abs(tb.x_min - o.box.x_min), std::abs(tb.y_min - o.box.y_min),
                                   std::abs(tb.x_max - o.box.x_max), std::abs(tb.y_max - o.box.y_max)});
      if (dev > 2.0)
        spdlog::warn("{}: object {} box deviates {:.1f}px from its mask; snapped", img.image_id, i, dev);
      o.box = tb;
    } else {
      auto clipped = clip_box(o.box, img.width(), img.height());
      if (!clipped) {
        spdlog::warn("{}: object {} lies outside the image; dropped", img.image_id, i);
        continue;
      }
      o.box = *clipped;
    }
    kept.push_back(std::move(o));
  }
  img.objects = std::move(kept);
}

Dataset load_coco(const fs::path& json_path, const fs::path& image_root) {
  const std::string text = read_file(json_path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(json_path.string() + ": " + e.what(), e.byte);
  }
  for (const char* key : {"images", "annotations", "categories"}) {
    if (!j.contains(key) || !j[key].is_array())
      throw ParseError(json_path.string() + ": missing '" + std::string(key) + "' array");
  }

  Dataset ds;
  try {
    for (const auto& c : j["categories"]) ds.categories.add(c.at("id").get<long long>(), c.value("name", ""));

    std::map<long long, std::size_t> image_index;
    for (const auto& im : j["images"]) {
      AnnotatedImage img;
      const auto id = im.at("id").get<long long>();
      const auto file_name = im.at("file_name").get<std::string>();
      img.image_id = fs::path(file_name).stem().string();
      const fs::path path = resolve_image(image_root, file_name, img.image_id);
      img.source = path.string();
      img.pixels = read_image(path);
      if (im.contains("width") && im.contains("height") &&
          (im["width"].get<int>() != img.width() || im["height"].get<int>() != img.height())) {
        throw IntegrityError("image " + file_name + " size differs from its record", {std::to_string(id)});
      }
      if (!image_index.emplace(id, ds.images.size()).second)
        throw IntegrityError("duplicate image id", {std::to_string(id)});
      ds.images.push_back(std::move(img));
    }

    std::vector<std::string> dangling;
    for (const auto& a : j["annotations"]) {
      const auto ann_id = std::to_string(a.value("id", -1LL));
      const auto image_id = a.at("image_id").get<long long>();
      auto it = image_index.find(image_id);
      if (it == image_index.end()) {
        dangling.push_back(ann_id + "->" + std::to_string(image_id));
        continue;
      }
      auto& img = ds.images[it->second];
      auto cls = ds.categories.find_original(a.at("category_id").get<long long>());
      if (!cls) throw IntegrityError("annotation " + ann_id + " has an unknown category", {ann_id});

      ObjectAnnotation obj;
      obj.class_id = *cls;
      obj.is_crowd = a.value("iscrowd", 0) != 0;
      const auto bbox = a.at("bbox").get<std::vector<double>>();
      if (bbox.size() != 4) throw ParseError("annotation " + ann_id + ": bbox must be [x,y,w,h]");
      if (a.contains("segmentation") && !(a["segmentation"].is_array() && a["segmentation"].empty()))
        obj.mask = decode_segmentation(a["segmentation"], img.width(), img.height(), ann_id);
      if (bbox[2] > 0 && bbox[3] > 0) {
        obj.box = Box::from_xywh(bbox[0], bbox[1], bbox[2], bbox[3]);
      } else if (obj.mask && tight_box(*obj.mask)) {
        obj.box = *tight_box(*obj.mask);
      } else {
        spdlog::warn("annotation {} has a degenerate box; skipped", ann_id);
        continue;
      }
      img.objects.push_back(std::move(obj));
    }
    if (!dangling.empty()) {
      throw IntegrityError(std::to_string(dangling.size()) + " annotation(s) reference missing images",
                           std::move(dangling));
    }
  } catch (const json::exception& e) {
    throw ParseError(json_path.string() + ": schema error: " + e.what());
  }

  for (auto& img : ds.images) normalize_objects(img);
  apply_provenance(ds, json_path.parent_path() / "provenance.json");
  return ds;
}

VocPaths VocPaths::from_root(const fs::path& root) {
  VocPaths p{root / "Annotations", root / "JPEGImages", std::nullopt, std::nullopt};
  if (fs::is_directory(root / "SegmentationClass")) p.seg_class_dir = root / "SegmentationClass";
  if (fs::is_directory(root / "SegmentationObject")) p.seg_object_dir = root / "SegmentationObject";
  return p;
}

Dataset load_voc(const VocPaths& paths, const std::vector<std::string>& class_names) {
  namespace pt = boost::property_tree;
  if (!fs::is_directory(paths.xml_dir)) throw IoError("not a directory: " + paths.xml_dir.string());

  Dataset ds;
  for (std::size_t i = 0; i < class_names.size(); ++i)
    ds.categories.add(static_cast<long long>(i + 1), class_names[i]);

  std::vector<fs::path> xmls;
  for (const auto& e : fs::directory_iterator(paths.xml_dir))
    if (e.is_regular_file() && e.path().extension() == ".xml") xmls.push_back(e.path());
  std::sort(xmls.begin(), xmls.end());

  for (const auto& xml : xmls) {
    pt::ptree tree;
    try {
      pt::read_xml(xml.string(), tree);
    } catch (const pt::xml_parser_error& e) {
      throw ParseError(xml.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    AnnotatedImage img;
    img.image_id = xml.stem().string();
    try {
      const auto& ann = tree.get_child("annotation");
      const auto file_name = ann.get<std::string>("filename", img.image_id + ".jpg");
      const fs::path path = resolve_image(paths.image_dir, file_name, img.image_id);
      img.source = path.string();
      img.pixels = read_image(path);
      for (const auto& [key, node] : ann) {
        if (key != "object") continue;
        const auto name = node.get<std::string>("name");
        auto cls = ds.categories.find_name(name);
        if (!cls) cls = ds.categories.add(static_cast<long long>(ds.categories.num_classes() + 1), name);
        const auto& bb = node.get_child("bndbox");
        ObjectAnnotation obj;
        obj.class_id = *cls;
        // 1-based inclusive -> 0-based half-open.
        obj.box = Box::make(bb.get<double>("xmin") - 1.0, bb.get<double>("ymin") - 1.0,
                            bb.get<double>("xmax"), bb.get<double>("ymax"));
        img.objects.push_back(std::move(obj));
      }
    } catch (const pt::ptree_error& e) {
      throw ParseError(xml.string() + ": " + e.what());
    } catch (const PreconditionError& e) {
      throw ParseError(xml.string() + ": " + e.what());
    }

    if (paths.seg_class_dir) {
      const fs::path p = *paths.seg_class_dir / (img.image_id + ".png");
      if (fs::exists(p)) {
        LabelMap labels = read_index_png(p);
        if (labels.width() != img.width() || labels.height() != img.height())
          throw IntegrityError("class PNG size differs from image", {img.image_id});
        for (auto& v : labels.data()) {
          if (v == 255) v = 0;
          else if (v > ds.categories.num_classes())
            throw IntegrityError("class PNG label " + std::to_string(v) + " out of range", {img.image_id});
        }
        img.semantic_map = std::move(labels);
      }
    }
    if (paths.seg_object_dir) {
      const fs::path p = *paths.seg_object_dir / (img.image_id + ".png");
      if (fs::exists(p)) {
        const LabelMap inst = read_index_png(p);
        if (inst.width() != img.width() || inst.height() != img.height())
          throw IntegrityError("object PNG size differs from image", {img.image_id});
        std::set<int> present;
        for (auto v : inst.data())
          if (v != 0 && v != 255) present.insert(v);
        const int n = static_cast<int>(img.objects.size());
        if (static_cast<int>(present.size()) != n || (n > 0 && (*present.begin() != 1 || *present.rbegin() != n))) {
          throw IntegrityError(img.image_id + ": object PNG has " + std::to_string(present.size()) +
                                   " instances, XML has " + std::to_string(n),
                               {img.image_id});
        }
        for (int k = 0; k < n; ++k) {
          Mask m(img.width(), img.height());
          auto src = inst.data();
          auto dst = m.data();
          for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] == k + 1;
          img.objects[static_cast<std::size_t>(k)].mask = std::move(m);
        }
      }
    }
    normalize_objects(img);
    ds.images.push_back(std::move(img));
  }
  apply_provenance(ds, paths.xml_dir.parent_path() / "provenance.json");
  return ds;
}

json Manifest::to_json() const {
  json j = extra;
  j["files"] = files;
  json cats = json::array();
  for (const auto& c : categories.all())
    cats.push_back({{"id", c.id}, {"original_id", c.original_id}, {"name", c.name}});
  j["categories"] = std::move(cats);
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  return j;
}

DatasetWriter::DatasetWriter(DatasetFormat format, fs::path out_dir, CategoryTable categories, bool overwrite)
    : format_(format), out_dir_(std::move(out_dir)), categories_(std::move(categories)) {
  if (fs::exists(out_dir_) && !(fs::is_directory(out_dir_) && fs::is_empty(out_dir_)) && !overwrite)
    throw IoError("output directory exists and is not empty: " + out_dir_.string());
  staging_ = out_dir_;
  staging_ += ".partial";
  std::error_code ec;
  fs::remove_all(staging_, ec);
  const std::vector<std::string> subdirs =
      format_ == DatasetFormat::coco
          ? std::vector<std::string>{"images", "semantic"}
          : std::vector<std::string>{"Annotations", "JPEGImages", "SegmentationClass", "SegmentationObject"};
  for (const auto& d : subdirs) {
    fs::create_directories(staging_ / d, ec);
    if (ec) throw IoError("cannot create " + (staging_ / d).string() + ": " + ec.message());
  }
}

DatasetWriter::~DatasetWriter() {
  if (!done_) abort();
}

void DatasetWriter::abort() noexcept {
  std::error_code ec;
  fs::remove_all(staging_, ec);
  done_ = true;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct IntBox {
  long x0, y0, x1, y1;
};

IntBox round_box(const Box& b) {
  IntBox r{std::lround(b.x_min), std::lround(b.y_min), std::lround(b.x_max), std::lround(b.y_max)};
  if (r.x1 <= r.x0) r.x1 = r.x0 + 1;
  if (r.y1 <= r.y0) r.y1 = r.y0 + 1;
  return r;
}

}  // namespace

void DatasetWriter::add(const AnnotatedImage& img) {
  if (done_) throw PreconditionError("DatasetWriter used after finish");
  json synthetic = json::array();
  for (std::size_t i = 0; i < img.objects.size(); ++i)
    if (img.objects[i].is_synthetic) synthetic.push_back(i);
  if (!synthetic.empty()) provenance_[img.image_id] = std::move(synthetic);

  if (format_ == DatasetFormat::coco) {
    const std::string file_name = img.image_id + ".png";
    write_png(staging_ / "images" / file_name, img.pixels);
    files_.push_back("images/" + file_name);
    if (img.semantic_map) {
      write_index_png(staging_ / "semantic" / file_name, *img.semantic_map);
      files_.push_back("semantic/" + file_name);
    }
    const auto coco_id = static_cast<long long>(coco_images_.size()) + 1;
    coco_images_.push_back(
        {{"id", coco_id}, {"file_name", file_name}, {"width", img.width()}, {"height", img.height()}});
    for (const auto& o : img.objects) {
      const IntBox b = round_box(o.box);
      json ann = {{"id", next_ann_id_++},
                  {"image_id", coco_id},
                  {"category_id", categories_.at(o.class_id).original_id},
                  {"bbox", {b.x0, b.y0, b.x1 - b.x0, b.y1 - b.y0}},
                  {"iscrowd", o.is_crowd ? 1 : 0}};
      if (o.mask) {
        const RleMask rle = encode_rle(*o.mask);
        ann["area"] = mask_area(*o.mask);
        ann["segmentation"] = {{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
      } else {
        ann["area"] = (b.x1 - b.x0) * (b.y1 - b.y0);
        ann["segmentation"] = json::array();
      }
      coco_annotations_.push_back(std::move(ann));
    }
    return;
  }

  const std::string png_name = img.image_id + ".png";
  write_png(staging_ / "JPEGImages" / png_name, img.pixels);
  files_.push_back("JPEGImages/" + png_name);
  const bool all_masks = !img.objects.empty() &&
                         std::all_of(img.objects.begin(), img.objects.end(),
                                     [](const ObjectAnnotation& o) { return o.mask.has_value(); });
  std::ostringstream xml;
  xml << "<annotation>\n"
      << "\t<folder>VOC</folder>\n"
      << "\t<filename>" << xml_escape(png_name) << "</filename>\n"
      << "\t<size>\n\t\t<width>" << img.width() << "</width>\n\t\t<height>" << img.height()
      << "</height>\n\t\t<depth>3</depth>\n\t</size>\n"
      << "\t<segmented>" << (all_masks || img.semantic_map ? 1 : 0) << "</segmented>\n";
  for (const auto& o : img.objects) {
    const IntBox b = round_box(o.box);
    xml << "\t<object>\n\t\t<name>" << xml_escape(categories_.at(o.class_id).name) << "</name>\n"
        << "\t\t<pose>Unspecified</pose>\n\t\t<truncated>0</truncated>\n\t\t<difficult>0</difficult>\n"
        << "\t\t<bndbox>\n\t\t\t<xmin>" << b.x0 + 1 << "</xmin>\n\t\t\t<ymin>" << b.y0 + 1
        << "</ymin>\n\t\t\t<xmax>" << b.x1 << "</xmax>\n\t\t\t<ymax>" << b.y1
        << "</ymax>\n\t\t</bndbox>\n\t</object>\n";
  }
  xml << "</annotation>\n";
  write_file(staging_ / "Annotations" / (img.image_id + ".xml"), xml.str());
  files_.push_back("Annotations/" + img.image_id + ".xml");

  if (img.semantic_map) {
    write_index_png(staging_ / "SegmentationClass" / png_name, *img.semantic_map);
    files_.push_back("SegmentationClass/" + png_name);
  }
  if (all_masks) {
    if (img.objects.size() > 254) throw IntegrityError("too many instances for an index PNG", {img.image_id});
    LabelMap inst(img.width(), img.height());
    for (std::size_t k = 0; k < img.objects.size(); ++k) {
      const auto src = img.objects[k].mask->data();
      auto dst = inst.data();
      for (std::size_t i = 0; i < src.size(); ++i) {
        if (!src[i]) continue;
        if (dst[i] != 0) throw IntegrityError("overlapping instance masks cannot be written", {img.image_id});
        dst[i] = static_cast<std::uint8_t>(k + 1);
      }
    }
    write_index_png(staging_ / "SegmentationObject" / png_name, inst);
    files_.push_back("SegmentationObject/" + png_name);
  }
}

Manifest DatasetWriter::finish(std::uint64_t seed, std::string config_hash, json extra) {
  if (done_) throw PreconditionError("DatasetWriter::finish called twice");
  if (format_ == DatasetFormat::coco) {
    json cats = json::array();
    for (const auto& c : categories_.all()) cats.push_back({{"id", c.original_id}, {"name", c.name}});
    json doc = {{"images", coco_images_}, {"annotations", coco_annotations_}, {"categories", cats}};
    write_file(staging_ / "annotations.json", doc.dump());
    files_.push_back("annotations.json");
  }
  write_file(staging_ / "provenance.json", json{{"synthetic", provenance_}}.dump(2) + "\n");
  files_.push_back("provenance.json");

  Manifest m;
  m.files = files_;
  std::sort(m.files.begin(), m.files.end());
  m.categories = categories_;
  m.seed = seed;
  m.config_hash = std::move(config_hash);
  m.extra = std::move(extra);
  write_file(staging_ / "manifest.json", m.to_json().dump(2) + "\n");

  std::error_code ec;
  if (fs::exists(out_dir_)) fs::remove_all(out_dir_, ec);
  fs::rename(staging_, out_dir_, ec);
  if (ec) throw IoError("cannot move output into place: " + ec.message());
  done_ = true;
  return m;
}

Manifest write_dataset(const Dataset& ds, DatasetFormat format, const fs::path& out_dir, bool overwrite) {
  DatasetWriter w(format, out_dir, ds.categories, overwrite);
  for (const auto& img : ds.images) w.add(img);
  return w.finish();
}

Dataset load_written(const fs::path& dir, DatasetFormat format) {
  if (format == DatasetFormat::coco) {
    Dataset ds = load_coco(dir / "annotations.json", dir / "images");
    for (auto& img : ds.images) {
      const fs::path p = dir / "semantic" / (img.image_id + ".png");
      if (fs::exists(p)) img.semantic_map = read_index_png(p);
    }
    return ds;
  }
  std::vector<std::string> names = voc_class_names();
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    names.clear();
    const json m = json::parse(read_file(manifest));
    for (const auto& c : m.at("categories"))
      names.push_back(c.at("name").get<std::string>());
  }
  return load_voc(VocPaths::from_root(dir), names);
}

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* p, std::size_t n) { EVP_DigestUpdate(ctx_, p, n); }
  template <typename T>
  void update_value(const T& v) {
    update(&v, sizeof v);
  }
  void update_str(std::string_view s) {
    update_value(s.size());
    update(s.data(), s.size());
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(digits[md[i] >> 4]);
      out.push_back(digits[md[i] & 15]);
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string content_hash(const Dataset& ds) {
  Sha256 h;
  for (const auto& c : ds.categories.all()) {
    h.update_value(c.original_id);
    h.update_str(c.name);
  }
  for (const auto& img : ds.images) {
    h.update_str(img.image_id);
    h.update_value(img.width());
    h.update_value(img.height());
    h.update(img.pixels.data().data(), img.pixels.data().size());
    h.update_value(img.objects.size());
    for (const auto& o : img.objects) {
      h.update_value(o.class_id);
      for (double v : {o.box.x_min, o.box.y_min, o.box.x_max, o.box.y_max}) h.update_value(v);
      h.update_value(static_cast<char>(o.is_crowd));
      h.update_value(static_cast<char>(o.is_synthetic));
      h.update_value(static_cast<char>(o.mask.has_value()));
      if (o.mask) h.update(o.mask->data().data(), o.mask->data().size());
    }
    h.update_value(static_cast<char>(img.semantic_map.has_value()));
    if (img.semantic_map) h.update(img.semantic_map->data().data(), img.semantic_map->data().size());
  }
  return h.hex();
}

}  // namespace ctxaug
