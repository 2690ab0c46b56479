#include "ctxaug/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ctxaug/annotation_update.hpp"
#include "ctxaug/error.hpp"
#include "ctxaug/image_codec.hpp"
#include "ctxaug/image_ops.hpp"
#include "ctxaug/weak_instances.hpp"

namespace ctxaug {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(AugmentMode m) {
  switch (m) {
    case AugmentMode::context: return "context";
    case AugmentMode::random: return "random";
    case AugmentMode::enlarge: return "enlarge";
  }
  return "context";
}

std::string to_string(Schedule s) { return s == Schedule::constant ? "constant" : "linear_decay"; }

AugmentMode parse_mode(const std::string& s) {
  for (auto m : {AugmentMode::context, AugmentMode::random, AugmentMode::enlarge})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown mode '" + s + "' (context, random, enlarge)");
}

Schedule parse_schedule(const std::string& s) {
  for (auto v : {Schedule::constant, Schedule::linear_decay})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown schedule '" + s + "' (constant, linear_decay)");
}

ContextRegime parse_regime(const std::string& s) {
  if (s == "small_data") return ContextRegime::small_data;
  if (s == "normal_data") return ContextRegime::normal_data;
  throw ConfigError("unknown regime '" + s + "' (small_data, normal_data)");
}

void AugmentConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(paste_probability >= 0.0 && paste_probability <= 1.0, "prob must lie in [0, 1]");
  require(max_placements >= 0, "max-paste must be >= 0");
  require(threshold >= 0.0 && threshold < 1.0, "threshold must lie in [0, 1)");
  require(variants >= 1, "variants must be >= 1");
  require(candidates >= 1, "candidates must be >= 1");
  require(bg_ratio >= 0.0, "bg-ratio must be >= 0");
  require(workers >= 1, "workers must be >= 1");
  require(min_pixels >= 1, "min-pixels must be >= 1");
}

json AugmentConfig::to_json() const {
  return {{"mode", to_string(mode)},
          {"paste_probability", paste_probability},
          {"schedule", to_string(schedule)},
          {"max_placements", max_placements},
          {"threshold", threshold},
          {"variants", variants},
          {"candidates", candidates},
          {"bg_ratio", bg_ratio},
          {"seed", seed},
          {"scorer", scorer},
          {"format_in", ctxaug::to_string(format_in)},
          {"format_out", ctxaug::to_string(format_out)},
          {"min_pixels", min_pixels},
          {"weak_masks", weak_masks}};
}

std::string AugmentConfig::hash() const { return sha256_hex(to_json().dump()); }

double paste_probability(double p0, Schedule schedule, std::size_t index, std::size_t count) {
  if (schedule == Schedule::constant || count == 0) return p0;
  const double t = static_cast<double>(index) / static_cast<double>(count);
  return p0 * (1.0 - t);
}

namespace {

json box_json(const Box& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

std::string origin_name(CandidateOrigin o) { return o == CandidateOrigin::sampled ? "sampled" : "neighbor"; }

}  // namespace

json PasteRecord::to_json() const {
  json j = {{"class_id", class_id},
            {"box", box_json(box)},
            {"cutout_image", cutout_image},
            {"cutout_object", cutout_object},
            {"scale", scale},
            {"blend", ctxaug::to_string(blend)},
            {"score", score},
            {"removed_objects", removed_objects}};
  j["origin"] = origin ? json(origin_name(*origin)) : json(nullptr);
  return j;
}

json ImageDecision::to_json() const {
  json p = json::array();
  for (const auto& r : pastes) p.push_back(r.to_json());
  return {{"image_id", image_id}, {"probability", probability}, {"drawn", drawn},
          {"augmented_id", augmented_id}, {"pastes", std::move(p)}, {"notes", notes}};
}

std::vector<PlacementCandidate> ContextSelector::choose(std::vector<PlacementCandidate>& candidates,
                                                        const AnnotatedImage& image, Rng& rng) {
  return select(candidates, image, scorer_, opts_, rng);
}

std::vector<PlacementCandidate> RandomSelector::choose(std::vector<PlacementCandidate>& candidates,
                                                       const AnnotatedImage&, Rng& rng) {
  const std::vector<int> classes = db_.classes();
  std::vector<PlacementCandidate> kept;
  for (auto& c : candidates) {
    if (static_cast<int>(kept.size()) >= max_placements_) break;
    if (c.origin != CandidateOrigin::sampled) continue;
    const bool clash = std::any_of(kept.begin(), kept.end(),
                                   [&](const PlacementCandidate& k) { return iou(k.box, c.box) >= max_pair_iou_; });
    if (clash) continue;
    std::vector<int> fitting;
    for (int cls : classes) {
      for (std::size_t i : db_.bucket(cls)) {
        if (admissible_scales(db_[i].width(), db_[i].height(), c.box)) {
          fitting.push_back(cls);
          break;
        }
      }
    }
    if (fitting.empty()) continue;
    c.selected_class = fitting[rng.below(fitting.size())];
    kept.push_back(c);
  }
  return kept;
}

AugmentResources build_resources(const Dataset& ds, const AugmentConfig& cfg) {
  AugmentResources r;
  if (cfg.mode == AugmentMode::enlarge) return r;
  r.hist = fit_shapes(ds.images);
  if (cfg.weak_masks)
    r.db = build_instance_db(with_weak_masks(ds.images, cfg.seed), cfg.min_pixels);
  else
    r.db = build_instance_db(ds.images, cfg.min_pixels);
  return r;
}

ImageAugmentation paste_objects(const AnnotatedImage& image, const AugmentResources& res,
                                CandidateSelector& selector, const AugmentConfig& cfg) {
  ImageAugmentation out;
  out.decision.image_id = image.image_id;
  const Rng base = Rng::derive(cfg.seed, image.image_id, "place");
  Rng propose_rng = base.fork("propose");
  Rng select_rng = base.fork("select");
  Rng match_rng = base.fork("match");
  Rng blend_rng = base.fork("blend");

  ProposeOptions popts;
  popts.num_candidates = cfg.candidates;
  out.candidates = propose(image, res.hist, propose_rng, popts);
  out.kept = selector.choose(out.candidates, image, select_rng);

  AnnotatedImage current = image;
  for (const auto& c : out.kept) {
    const int cls = *c.selected_class;
    const auto m = match_cutout(c.box, cls, res.db, match_rng);
    if (!m) {
      out.decision.notes.push_back(fmt::format("candidate {} (class {}): no matching cutout", c.index, cls));
      continue;
    }
    const BlendMode mode = kBlendModes[blend_rng.below(kBlendModes.size())];
    const InstanceCutout& cut = res.db[m->cutout_index];
    BlendResult b = blend(current.pixels, BlendSpec{mode, &cut, m->placement, m->scale}, blend_rng);
    if (mask_area(b.pasted_mask) == 0) {
      out.decision.notes.push_back(fmt::format("candidate {}: pasted mask vanished after resizing", c.index));
      continue;
    }
    current.pixels = std::move(b.image);
    const UpdateReport rep = apply_paste(current, b.pasted_mask, cls);
    PasteRecord rec;
    rec.class_id = cls;
    rec.box = current.objects.back().box;
    rec.cutout_image = cut.source_image_id;
    rec.cutout_object = cut.source_object;
    rec.scale = m->scale;
    rec.blend = mode;
    rec.origin = c.origin;
    rec.score = c.score();
    rec.removed_objects = rep.removed.size();
    out.decision.pastes.push_back(std::move(rec));
  }
  for (const auto& n : out.decision.notes) spdlog::debug("{}: {}", image.image_id, n);
  if (!out.decision.pastes.empty()) {
    current.image_id += "_aug";
    out.decision.augmented_id = current.image_id;
    out.augmented = std::move(current);
  }
  return out;
}

ImageAugmentation enlarge_objects(const AnnotatedImage& image, const AugmentConfig& cfg) {
  ImageAugmentation out;
  out.decision.image_id = image.image_id;
  Rng rng = Rng::derive(cfg.seed, image.image_id, "enlarge");
  AnnotatedImage current = image;
  for (std::size_t i = 0; i < image.objects.size(); ++i) {
    const auto& o = image.objects[i];
    if (!o.mask || o.is_crowd) continue;
    EnlargeResult r = enlarge_reblend(current.pixels, image.pixels, o, rng);
    if (mask_area(r.pasted_mask) == 0) continue;
    current.pixels = std::move(r.image);
    const UpdateReport rep = apply_paste(current, r.pasted_mask, o.class_id);
    PasteRecord rec;
    rec.class_id = o.class_id;
    rec.box = current.objects.back().box;
    rec.cutout_image = image.image_id;
    rec.cutout_object = i;
    rec.scale = r.factor;
    rec.blend = r.mode;
    rec.removed_objects = rep.removed.size();
    out.decision.pastes.push_back(std::move(rec));
  }
  if (!out.decision.pastes.empty()) {
    current.image_id += "_aug";
    out.decision.augmented_id = current.image_id;
    out.augmented = std::move(current);
  }
  return out;
}

ImageAugmentation augment_image(const AnnotatedImage& image, std::size_t index, std::size_t count,
                                const AugmentConfig& cfg, const AugmentResources& res,
                                CandidateSelector* selector) {
  const double p = paste_probability(cfg.paste_probability, cfg.schedule, index, count);
  Rng gate = Rng::derive(cfg.seed, image.image_id, "gate");
  const bool drawn = gate.uniform() < p;
  ImageAugmentation out;
  if (drawn) {
    if (cfg.mode == AugmentMode::enlarge) {
      out = enlarge_objects(image, cfg);
    } else {
      if (!selector) throw PreconditionError("placement modes need a candidate selector");
      out = paste_objects(image, res, *selector, cfg);
    }
  }
  out.decision.image_id = image.image_id;
  out.decision.probability = p;
  out.decision.drawn = drawn;
  return out;
}

namespace {

/// Calls job(i, worker) for i in [0, n) on `workers` threads and rethrows the
/// first failure after all threads stopped.
template <typename Job>
void run_parallel(std::size_t n, int workers, Job job) {
  const auto threads = static_cast<std::size_t>(std::clamp<long long>(workers, 1, static_cast<long long>(std::max<std::size_t>(n, 1))));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&](std::size_t worker) {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        job(i, worker);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  if (threads == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body, t);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << j.dump(2) << '\n';
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace

AugmentSummary augment_dataset(const Dataset& ds, const AugmentConfig& cfg, Scorer* scorer, const fs::path& out_dir,
                               const AugmentHooks& hooks, bool overwrite) {
  cfg.validate();
  if (cfg.mode == AugmentMode::context && !scorer && !hooks.selector)
    throw ConfigError("context mode needs a scorer");
  if (scorer && scorer->num_classes() != ds.categories.num_classes())
    throw ConfigError(fmt::format("scorer reports {} classes, dataset has {}", scorer->num_classes(),
                                  ds.categories.num_classes()));

  const AugmentResources res = ds.images.empty() ? AugmentResources{ShapeHistogram(), InstanceDatabase()} : build_resources(ds, cfg);
  auto make_selector = [&]() -> std::unique_ptr<CandidateSelector> {
    if (hooks.selector) return hooks.selector(res);
    if (cfg.mode == AugmentMode::context) {
      SelectOptions so;
      so.threshold = cfg.threshold;
      so.variants = cfg.variants;
      so.max_placements = cfg.max_placements;
      return std::make_unique<ContextSelector>(*scorer, so);
    }
    if (cfg.mode == AugmentMode::random) return std::make_unique<RandomSelector>(res.db, cfg.max_placements);
    return nullptr;
  };
  std::vector<std::unique_ptr<CandidateSelector>> selectors;
  for (int w = 0; w < cfg.workers; ++w) selectors.push_back(make_selector());

  if (cfg.dump_candidates) fs::create_directories(*cfg.dump_candidates);

  DatasetWriter writer(cfg.format_out, out_dir, ds.categories, overwrite);
  AugmentSummary summary;
  json decisions = json::array();
  const std::size_t n = ds.images.size();
  const std::size_t chunk = static_cast<std::size_t>(cfg.workers) * 8;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t end = std::min(n, start + chunk);
    std::vector<ImageAugmentation> results(end - start);
    run_parallel(end - start, cfg.workers, [&](std::size_t k, std::size_t worker) {
      results[k] = augment_image(ds.images[start + k], start + k, n, cfg, res, selectors[worker].get());
    });
    for (std::size_t k = 0; k < results.size(); ++k) {
      const auto& r = results[k];
      writer.add(ds.images[start + k]);
      if (r.augmented) {
        writer.add(*r.augmented);
        ++summary.augmented;
      }
      summary.pastes += r.decision.pastes.size();
      decisions.push_back(r.decision.to_json());
      if (cfg.dump_candidates && !r.candidates.empty())
        write_json(*cfg.dump_candidates / (r.decision.image_id + ".json"),
                   candidates_to_json(ds.images[start + k], r.candidates, r.kept));
    }
  }
  summary.images = n;
  spdlog::info("augmented {} of {} images, {} pastes", summary.augmented, n, summary.pastes);
  json extra = {{"config", cfg.to_json()},
                {"decisions", std::move(decisions)},
                {"totals", {{"images", n}, {"augmented", summary.augmented}, {"pastes", summary.pastes}}}};
  summary.manifest = writer.finish(cfg.seed, cfg.hash(), std::move(extra));
  return summary;
}

std::vector<int> balance_split(std::span<const AnnotatedImage> images, int num_classes, std::uint64_t seed) {
  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::derive(seed, "context-split", "order");
  rng.shuffle(std::span(order));

  const auto width = static_cast<std::size_t>(num_classes) + 1;
  std::array<std::vector<long long>, 2> counts{std::vector<long long>(width), std::vector<long long>(width)};
  std::array<long long, 2> totals{0, 0};
  std::array<std::size_t, 2> sizes{0, 0};
  std::vector<int> side(images.size(), 0);
  std::vector<long long> pos(width);
  for (std::size_t i : order) {
    std::fill(pos.begin(), pos.end(), 0);
    long long total = 0;
    for (const auto& o : images[i].objects) {
      if (o.is_crowd || o.class_id < 1 || o.class_id > num_classes) continue;
      ++pos[static_cast<std::size_t>(o.class_id)];
      ++total;
    }
    auto cost = [&](int s) {
      long long c = 0;
      for (std::size_t k = 1; k < width; ++k) {
        const long long a = counts[0][k] + (s == 0 ? pos[k] : 0);
        const long long b = counts[1][k] + (s == 1 ? pos[k] : 0);
        c += a > b ? a - b : b - a;
      }
      return c;
    };
    const long long c0 = cost(0), c1 = cost(1);
    int s = 0;
    if (c1 < c0)
      s = 1;
    else if (c1 == c0)
      s = totals[1] < totals[0] || (totals[1] == totals[0] && sizes[1] < sizes[0]) ? 1 : 0;
    side[i] = s;
    for (std::size_t k = 0; k < width; ++k) counts[static_cast<std::size_t>(s)][k] += pos[k];
    totals[static_cast<std::size_t>(s)] += total;
    ++sizes[static_cast<std::size_t>(s)];
  }

  // Local search: single moves, then pairwise swaps on moderate sizes, while
  // the summed per-class imbalance drops.
  std::vector<std::vector<long long>> per_image(images.size(), std::vector<long long>(width));
  for (std::size_t i = 0; i < images.size(); ++i)
    for (const auto& o : images[i].objects)
      if (!o.is_crowd && o.class_id >= 1 && o.class_id <= num_classes) ++per_image[i][static_cast<std::size_t>(o.class_id)];
  std::vector<long long> diff(width);  // side 0 minus side 1
  for (std::size_t k = 1; k < width; ++k) diff[k] = counts[0][k] - counts[1][k];
  auto gain = [&](std::size_t i, const std::vector<long long>* j) {
    // improvement of sum |diff| when i changes side (and j, if given, the other way)
    const long long si = side[i] == 0 ? 1 : -1;
    long long g = 0;
    for (std::size_t k = 1; k < width; ++k) {
      long long delta = -2 * si * per_image[i][k];
      if (j) delta += 2 * si * (*j)[k];
      if (delta == 0) continue;
      g += std::llabs(diff[k]) - std::llabs(diff[k] + delta);
    }
    return g;
  };
  auto apply = [&](std::size_t i) {
    const long long si = side[i] == 0 ? 1 : -1;
    for (std::size_t k = 1; k < width; ++k) diff[k] -= 2 * si * per_image[i][k];
    side[i] = 1 - side[i];
  };
  constexpr std::size_t kSwapLimit = 3000;
  for (bool improved = true; improved;) {
    improved = false;
    for (std::size_t i : order) {
      if (gain(i, nullptr) > 0) {
        apply(i);
        improved = true;
      }
    }
    if (improved || images.size() > kSwapLimit) continue;
    for (std::size_t a = 0; a < order.size() && !improved; ++a)
      for (std::size_t b = a + 1; b < order.size() && !improved; ++b) {
        const std::size_t i = order[a], j = order[b];
        if (side[i] == side[j] || gain(i, &per_image[j]) <= 0) continue;
        apply(i);
        apply(j);
        improved = true;
      }
  }
  return side;
}

ContextExportSummary export_context_set(const Dataset& ds, const AugmentConfig& cfg, ContextRegime regime,
                                        const fs::path& out_dir, bool overwrite) {
  cfg.validate();
  if (fs::exists(out_dir)) {
    if (!overwrite && !fs::is_empty(out_dir)) throw IoError(out_dir.string() + " exists (use --overwrite)");
    fs::remove_all(out_dir);
  }
  const ShapeHistogram hist = fit_shapes(ds.images);
  TrainingSetOptions topts;
  topts.bg_ratio = cfg.bg_ratio;
  const int C = ds.categories.num_classes();

  std::vector<std::pair<std::string, std::vector<std::size_t>>> splits;
  if (regime == ContextRegime::small_data) {
    std::vector<std::size_t> all(ds.images.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    splits.emplace_back("all", std::move(all));
  } else {
    std::vector<std::size_t> positives(static_cast<std::size_t>(C) + 1);
    for (const auto& img : ds.images)
      for (const auto& o : img.objects)
        if (!o.is_crowd) ++positives.at(static_cast<std::size_t>(o.class_id));
    for (int c = 1; c <= C; ++c)
      if (positives[static_cast<std::size_t>(c)] < 2)
        spdlog::warn("class '{}' has {} positives; it cannot be split", ds.categories.at(c).name,
                     positives[static_cast<std::size_t>(c)]);
    const auto side = balance_split(ds.images, C, cfg.seed);
    std::vector<std::size_t> a, b;
    for (std::size_t i = 0; i < side.size(); ++i) (side[i] == 0 ? a : b).push_back(i);
    splits.emplace_back("a", std::move(a));
    splits.emplace_back("b", std::move(b));
  }

  ContextExportSummary summary;
  for (const auto& [name, members] : splits) {
    ContextExportSummary::Split s;
    s.name = name;
    s.per_class.assign(static_cast<std::size_t>(C) + 1, 0);
    const fs::path dir = out_dir / name;
    fs::create_directories(dir / "images");
    std::ofstream csv(dir / "labels.csv", std::ios::binary);
    if (!csv) throw IoError("cannot write " + (dir / "labels.csv").string());
    csv << "path,label\n";
    std::size_t counter = 0;
    for (std::size_t i : members) {
      const auto& img = ds.images[i];
      Rng rng = Rng::derive(cfg.seed, img.image_id, "context-set");
      for (const auto& ci : contextual_examples(img, hist, topts, rng)) {
        const std::string rel = fmt::format("images/{:06d}.png", counter++);
        write_png(dir / rel, ci.pixels);
        csv << rel << ',' << ci.label << '\n';
        if (ci.label == 0) {
          ++s.backgrounds;
        } else {
          ++s.positives;
          ++s.per_class.at(static_cast<std::size_t>(ci.label));
        }
      }
    }
    if (!csv) throw IoError("write failed: " + (dir / "labels.csv").string());
    json meta = {{"split", name}, {"positives", s.positives}, {"backgrounds", s.backgrounds},
                 {"per_class", s.per_class}, {"shape_histogram", hist.to_json()}};
    json cats = json::array();
    for (const auto& c : ds.categories.all()) cats.push_back({{"id", c.id}, {"name", c.name}});
    meta["categories"] = std::move(cats);
    write_json(dir / "meta.json", meta);
    spdlog::info("split {}: {} positives, {} backgrounds", name, s.positives, s.backgrounds);
    summary.splits.push_back(std::move(s));
  }
  return summary;
}

json dataset_stats(const Dataset& ds) {
  const int C = ds.categories.num_classes();
  std::vector<std::size_t> instances(static_cast<std::size_t>(C) + 1), synthetic(instances.size()),
      masked(instances.size());
  std::size_t objects = 0, synthetic_total = 0;
  for (const auto& img : ds.images) {
    for (const auto& o : img.objects) {
      const auto k = static_cast<std::size_t>(o.class_id);
      if (k >= instances.size()) continue;
      ++objects;
      ++instances[k];
      if (o.mask) ++masked[k];
      if (o.is_synthetic) {
        ++synthetic[k];
        ++synthetic_total;
      }
    }
  }
  json classes = json::array();
  for (const auto& c : ds.categories.all()) {
    const auto k = static_cast<std::size_t>(c.id);
    classes.push_back({{"id", c.id}, {"name", c.name}, {"instances", instances[k]}, {"masked", masked[k]},
                       {"synthetic", synthetic[k]}});
  }
  json j = {{"images", ds.images.size()},
            {"objects", objects},
            {"synthetic", synthetic_total},
            {"classes", std::move(classes)}};
  try {
    j["shape_histogram"] = fit_shapes(ds.images).to_json();
  } catch (const EmptyDistribution&) {
    j["shape_histogram"] = nullptr;
  }
  return j;
}

std::vector<std::string> validate_dataset(const Dataset& ds) {
  std::vector<std::string> problems;
  std::vector<std::string> ids;
  for (const auto& img : ds.images) {
    std::vector<std::string> local;
    check_image(img, ds.categories.num_classes(), &local);
    for (auto& p : local) problems.push_back(img.image_id + ": " + p);
    ids.push_back(img.image_id);
  }
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 1; i < ids.size(); ++i)
    if (ids[i] == ids[i - 1]) problems.push_back(ids[i] + ": duplicate image id");
  return problems;
}

PreviewFiles preview(const Dataset& ds, const std::string& image_id, const AugmentConfig& cfg, Scorer* scorer,
                     const fs::path& out_dir) {
  cfg.validate();
  const auto it = std::find_if(ds.images.begin(), ds.images.end(),
                               [&](const AnnotatedImage& img) { return img.image_id == image_id; });
  if (it == ds.images.end()) throw NotFound("no image '" + image_id + "'");
  if (cfg.mode == AugmentMode::context && !scorer) throw ConfigError("context mode needs a scorer");
  const auto index = static_cast<std::size_t>(it - ds.images.begin());

  const AugmentResources res = build_resources(ds, cfg);
  std::unique_ptr<CandidateSelector> selector;
  if (cfg.mode == AugmentMode::context) {
    SelectOptions so;
    so.threshold = cfg.threshold;
    so.variants = cfg.variants;
    so.max_placements = cfg.max_placements;
    selector = std::make_unique<ContextSelector>(*scorer, so);
  } else if (cfg.mode == AugmentMode::random) {
    selector = std::make_unique<RandomSelector>(res.db, cfg.max_placements);
  }
  const ImageAugmentation aug = augment_image(*it, index, ds.images.size(), cfg, res, selector.get());

  fs::create_directories(out_dir);
  PreviewFiles files{out_dir / "original.png", out_dir / "augmented.png", out_dir / "side_by_side.png",
                     out_dir / "candidates.png", out_dir / "candidates.json"};
  const RgbImage& after = aug.augmented ? aug.augmented->pixels : it->pixels;
  write_png(files.original, it->pixels);
  write_png(files.augmented, after);
  write_png(files.side_by_side, hconcat(it->pixels, after));

  RgbImage overlay = it->pixels;
  auto kept = [&](const PlacementCandidate& c) {
    return std::any_of(aug.kept.begin(), aug.kept.end(), [&](const auto& k) { return k.index == c.index; });
  };
  for (int pass = 0; pass < 3; ++pass) {
    for (const auto& c : aug.candidates) {
      const int level = kept(c) ? 2 : (c.selected_class ? 1 : 0);
      if (level != pass) continue;
      static constexpr Rgb colours[3] = {{128, 128, 128}, {255, 220, 0}, {0, 220, 0}};
      draw_rect(overlay, c.box.pixels(), colours[level], level == 2 ? 2 : 1);
    }
  }
  write_png(files.overlay, overlay);
  json j = candidates_to_json(*it, aug.candidates, aug.kept);
  json doc = {{"decision", aug.decision.to_json()}, {"candidates", std::move(j)}};
  write_json(files.candidates, doc);
  return files;
}

}  // namespace ctxaug
