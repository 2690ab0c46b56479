// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "ctxaug/annotation_update.hpp"
#include "ctxaug/context_extract.hpp"
#include "ctxaug/instance_db.hpp"
#include "ctxaug/pipeline.hpp"
#include "ctxaug/placement.hpp"
#include "ctxaug/rle.hpp"
#include "ctxaug/scorer.hpp"
#include "ctxaug/shape_model.hpp"
#include "ctxaug/weak_instances.hpp"
#include "fixtures.hpp"

using namespace ctxaug;
using namespace ctxaug::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double limit_s;
  std::function<Outcome()> check;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

// Geometry

double cell_iou(const Box& a, const Box& b, int grid, double* cov) {
  long long na = 0, nb = 0, both = 0;
  for (int y = 0; y < grid; ++y)
    for (int x = 0; x < grid; ++x) {
      const Point p{x + 0.5, y + 0.5};
      const bool ia = a.contains(p), ib = b.contains(p);
      na += ia;
      nb += ib;
      both += ia && ib;
    }
  *cov = static_cast<double>(both) / static_cast<double>(nb);
  return static_cast<double>(both) / static_cast<double>(na + nb - both);
}

Outcome geometry() {
  constexpr int kGrid = 64;
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Box a = random_int_box(rng, kGrid, 40), b = random_int_box(rng, kGrid, 40);
    double cov = 0.0;
    const double want = cell_iou(a, b, kGrid, &cov);
    worst = std::max({worst, std::abs(iou(a, b) - want), std::abs(coverage(a, b) - cov)});
  }
  return {worst <= 1e-9, fmt::format("max |err| {:.2e}, tol 1e-9", worst)};
}

// RLE

std::vector<std::uint32_t> column_runs(const Mask& m) {
  std::vector<std::uint32_t> runs;
  std::uint8_t cur = 0;
  std::uint32_t n = 0;
  for (int x = 0; x < m.width(); ++x)
    for (int y = 0; y < m.height(); ++y) {
      const std::uint8_t v = m.at(x, y) ? 1 : 0;
      if (v != cur) {
        runs.push_back(n);
        n = 0;
        cur = v;
      }
      ++n;
    }
  runs.push_back(n);
  return runs;
}

Outcome rle() {
  if (encode_rle(Mask(3, 3)).counts != std::vector<std::uint32_t>{9}) return fail("empty 3x3 is not [9]");
  Mask first(3, 3);
  first.at(0, 0) = 1;
  if (encode_rle(first).counts != std::vector<std::uint32_t>{0, 1, 8}) return fail("first pixel is not [0,1,8]");
  Rng rng(102);
  for (int i = 0; i < 10000; ++i) {
    const int w = 1 + static_cast<int>(rng.below(64)), h = 1 + static_cast<int>(rng.below(64));
    const Mask m = random_mask(rng, w, h, rng.uniform());
    const RleMask r = encode_rle(m);
    if (r.counts != column_runs(m)) return fail(fmt::format("mask {} runs differ from traversal", i));
    if (decode_rle(r) != m) return fail(fmt::format("mask {} does not round-trip", i));
    if (decode_rle({rle_counts_from_string(rle_counts_to_string(r.counts)), h, w}) != m)
      return fail(fmt::format("mask {} string form does not round-trip", i));
  }
  return {true, "fixtures exact, 10000 round trips"};
}

// Contextual images

Outcome contextual() {
  Rng rng(103);
  for (int i = 0; i < 200; ++i) {
    SceneOptions o;
    o.width = 40 + static_cast<int>(rng.below(160));
    o.height = 40 + static_cast<int>(rng.below(160));
    o.min_side = 4;
    o.max_side = std::min(o.width, o.height) / 2;
    const AnnotatedImage img = random_scene(fmt::format("c{}", i), rng, o);
    const double w = rng.uniform(1, o.width), h = rng.uniform(1, o.height);
    const double x = rng.uniform(0, o.width - w), y = rng.uniform(0, o.height - h);
    const Box b = Box::make(x, y, x + w, y + h);
    const auto ci = make_contextual(img, b, rng);
    const Box& n = ci.neighborhood;
    if (!(n.x_min <= b.x_min && n.y_min <= b.y_min && n.x_max >= b.x_max && n.y_max >= b.y_max) ||
        !n.inside(o.width, o.height))
      return fail(fmt::format("pair {}: neighbourhood does not contain the box", i));
    for (int oy = 0; oy < kContextSize; ++oy)
      for (int ox = 0; ox < kContextSize; ++ox) {
        const double sx = n.x_min + (ox + 0.5) * n.width() / kContextSize;
        const double sy = n.y_min + (oy + 0.5) * n.height() / kContextSize;
        if (sx > b.x_min && sx < b.x_max && sy > b.y_min && sy < b.y_max && get_rgb(ci.pixels, ox, oy) != kContextFill)
          return fail(fmt::format("pair {}: pixel ({},{}) inside the box is not filled", i, ox, oy));
      }
  }

  // Background shapes against the positive (ground-truth) shape distribution.
  SceneOptions o;
  o.width = 160;
  o.height = 160;
  o.max_side = 60;
  const Dataset ds = scene_dataset(400, 104, o);
  const ShapeHistogram hist = fit_shapes(ds.images);
  std::vector<double> seen(static_cast<std::size_t>(hist.scale_bins() * hist.aspect_bins()), 0.0);
  std::size_t n = 0;
  TrainingSetOptions t;
  for (std::size_t round = 0; n < 10000; ++round) {
    const auto& img = ds.images[round % ds.images.size()];
    Rng r = Rng::derive(105, img.image_id, fmt::format("bg{}", round));
    for (const Box& b : sample_background_boxes(img, hist, 3, t, r)) {
      if (n == 10000) break;
      seen[static_cast<std::size_t>(hist.bin_of(shape_params(b, img.width(), img.height())))] += 1.0;
      ++n;
    }
  }
  double tv = 0.0;
  for (std::size_t k = 0; k < seen.size(); ++k) tv += std::abs(seen[k] / n - hist.probability(static_cast<int>(k)));
  tv /= 2.0;
  return {tv <= 0.07, fmt::format("200 pairs exact; background shape TV {:.4f} at 10000 samples, tol 0.07", tv)};
}

// Matching

bool grid_admissible(double cw, double ch, const Box& cand, double* lo, double* hi) {
  bool any = false;
  for (int k = 5000; k <= 15000; ++k) {
    const double f = k * 1e-4;
    if (f * cw <= cand.width() && f * ch <= cand.height() && f * f * cw * ch >= 0.8 * cand.area()) {
      if (!any) *lo = f;
      *hi = f;
      any = true;
    }
  }
  return any;
}

Outcome matching() {
  SceneOptions o;
  o.width = 128;
  o.height = 128;
  o.min_side = 8;
  o.max_side = 50;
  const Dataset ds = scene_dataset(60, 106, o);
  const InstanceDatabase db = build_instance_db(ds.images, 16);
  Rng rng(107);
  std::size_t matched = 0;
  for (int i = 0; i < 1000; ++i) {
    const double w = rng.uniform(4, 70), h = rng.uniform(4, 70);
    const double x = rng.uniform(0, 128 - w), y = rng.uniform(0, 128 - h);
    const Box cand = Box::make(x, y, x + w, y + h);
    const int cls = 1 + static_cast<int>(rng.below(3));

    // admissibility of one random cutout against the f grid
    const auto& cut = db[rng.below(db.size())];
    double glo = 0, ghi = 0;
    const bool grid = grid_admissible(cut.width(), cut.height(), cand, &glo, &ghi);
    const auto range = admissible_scales(cut.width(), cut.height(), cand);
    if (grid && !range) return fail(fmt::format("pair {}: grid finds f={} but the range is empty", i, glo));
    if (range && range->hi - range->lo > 2e-4 && !grid) return fail(fmt::format("pair {}: grid finds nothing", i));
    if (grid && (range->lo > glo + 1e-9 || range->hi < ghi - 1e-9))
      return fail(fmt::format("pair {}: range misses grid points", i));

    bool any = false;
    for (std::size_t idx : db.bucket(cls)) {
      double a, b;
      any |= grid_admissible(db[idx].width(), db[idx].height(), cand, &a, &b);
    }
    const auto m = match_cutout(cand, cls, db, rng);
    if (any && !m) return fail(fmt::format("pair {}: admissible cutout exists but no match", i));
    if (!m) continue;
    ++matched;
    const auto& c = db[m->cutout_index];
    if (c.class_id != cls) return fail(fmt::format("pair {}: wrong class", i));
    if (m->scale < 0.5 || m->scale > 1.5) return fail(fmt::format("pair {}: f={} out of range", i, m->scale));
    const double pw = m->scale * c.width(), ph = m->scale * c.height();
    if (pw > cand.width() + 1e-9 || ph > cand.height() + 1e-9) return fail(fmt::format("pair {}: not contained", i));
    if (pw * ph < 0.8 * cand.area() - 1e-9) return fail(fmt::format("pair {}: covers under 80%", i));
    const Box& p = m->placement;
    if (p.x_min < cand.x_min - 1e-9 || p.y_min < cand.y_min - 1e-9 || p.x_max > cand.x_max + 1e-9 ||
        p.y_max > cand.y_max + 1e-9)
      return fail(fmt::format("pair {}: placement box outside the candidate", i));
  }
  return {matched > 50, fmt::format("1000 pairs, {} matched, grid step 1e-4", matched)};
}

// Selection

ScoreVector one_hot(int classes, int k, double v) {
  ScoreVector s{std::vector<double>(static_cast<std::size_t>(classes) + 1, 0.0)};
  s.values[static_cast<std::size_t>(k)] = v;
  const double rest = (1.0 - v) / classes;
  for (int i = 0; i <= classes; ++i)
    if (i != k) s.values[static_cast<std::size_t>(i)] = rest;
  return s;
}

Outcome selection() {
  AnnotatedImage blank;
  blank.image_id = "blank";
  blank.pixels = RgbImage(200, 200);
  const Dataset ds = scene_dataset(5, 108);
  const ShapeHistogram hist = fit_shapes(ds.images);
  Rng rng(109);
  const auto sampled = propose(blank, hist, rng);
  if (sampled.size() != 200) return fail(fmt::format("{} sampled candidates, want 200", sampled.size()));

  auto boxes = [] {
    std::vector<PlacementCandidate> cs(10);
    for (std::size_t i = 0; i < 10; ++i) {
      cs[i].box = Box::make(i * 20.0, 0, i * 20.0 + 10, 10);
      cs[i].index = i;
    }
    return cs;
  };
  {
    auto cs = boxes();
    ScriptedScorer s(3, [](const ContextualImage&, std::size_t) { return one_hot(3, 2, 0.7); });
    if (!select(cs, blank, s, {}, rng).empty()) return fail("score exactly 0.7 was selected");
  }
  {
    auto cs = boxes();
    ScriptedScorer s(3, [](const ContextualImage&, std::size_t) { return one_hot(3, 2, std::nextafter(0.7, 1.0)); });
    if (select(cs, blank, s, {}, rng).size() != 2) return fail("scores just above 0.7 did not give 2 placements");
  }
  {
    auto cs = boxes();
    ScriptedScorer s(3, [](const ContextualImage& ci, std::size_t) {
      return one_hot(3, 1, 0.75 + ci.source_box.x_min / 1000.0);
    });
    const auto kept = select(cs, blank, s, {}, rng);
    if (kept.size() != 2 || kept[0].index != 9 || kept[1].index != 8) return fail("top two not kept");
  }
  const std::vector<ScoreVector> script{{{0.7, 0.1, 0.1, 0.1}}, {{0.1, 0.7, 0.1, 0.1}}, {{0.05, 0.05, 0.0, 0.9}}};
  ScriptedScorer s(3, [&](const ContextualImage&, std::size_t call) { return script[call % 3]; });
  const auto v = averaged_score(ds.images[0], ds.images[0].objects[0].box, 3, rng, s);
  if (s.calls() != 3) return fail(fmt::format("{} scorer calls, want 3", s.calls()));
  for (std::size_t k = 0; k < 4; ++k) {
    const double want = (script[0].values[k] + script[1].values[k] + script[2].values[k]) / 3.0;
    if (std::abs(v[k] - want) > 1e-12) return fail(fmt::format("averaged score {} is {} not {}", k, v[k], want));
  }
  return {true, "threshold strict, <=2 kept, 200 sampled, mean within 1e-12"};
}

// Annotation update

Outcome annotation() {
  SceneOptions o;
  o.width = 64;
  o.height = 64;
  o.max_objects = 6;
  o.min_side = 6;
  o.max_side = 30;
  Rng rng(110);
  std::size_t removed = 0, deleted_boxes = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const AnnotatedImage img = random_scene("s", rng, o);
    // every other scene pastes over an existing object so both rules fire
    const Box target = trial % 2 == 0 || img.objects.empty()
                           ? random_int_box(rng, 64, 40)
                           : img.objects[rng.below(img.objects.size())].box;
    const Mask paste = ellipse_mask(64, 64, target);
    if (mask_area(paste) == 0) continue;

    std::vector<std::size_t> want_removed;
    std::vector<Mask> want_masks;
    for (std::size_t i = 0; i < img.objects.size(); ++i) {
      const Mask& m = *img.objects[i].mask;
      std::size_t area = 0, hidden = 0;
      Mask visible = m;
      for (std::size_t p = 0; p < m.data().size(); ++p) {
        area += m.data()[p] != 0;
        hidden += m.data()[p] && paste.data()[p];
        if (paste.data()[p]) visible.data()[p] = 0;
      }
      if (area == 0 || static_cast<double>(hidden) > 0.8 * static_cast<double>(area))
        want_removed.push_back(i);
      else
        want_masks.push_back(std::move(visible));
    }
    want_masks.push_back(paste);

    auto objs = img.objects;
    const auto rep = update_instances(objs, paste, 3);
    removed += rep.removed.size();
    if (rep.removed != want_removed) return fail(fmt::format("scene {}: discard decisions differ", trial));
    if (objs.size() != want_masks.size()) return fail(fmt::format("scene {}: object count differs", trial));
    for (std::size_t i = 0; i < objs.size(); ++i) {
      if (*objs[i].mask != want_masks[i]) return fail(fmt::format("scene {}: mask {} differs", trial, i));
      if (objs[i].box != *tight_box(want_masks[i])) return fail(fmt::format("scene {}: box {} not tight", trial, i));
      for (std::size_t j = i + 1; j < objs.size(); ++j)
        for (std::size_t p = 0; p < objs[i].mask->data().size(); ++p)
          if (objs[i].mask->data()[p] && objs[j].mask->data()[p])
            return fail(fmt::format("scene {}: masks {} and {} overlap", trial, i, j));
    }

    // box-only rule on the same scene
    std::vector<ObjectAnnotation> boxes;
    for (const auto& ob : img.objects) boxes.push_back({ob.class_id, ob.box, std::nullopt, false, false});
    const Box pasted_box = *tight_box(paste);
    std::vector<std::size_t> want_deleted;
    for (std::size_t i = 0; i < boxes.size(); ++i)
      if (iou(boxes[i].box, pasted_box) > 0.8) want_deleted.push_back(i);
    const auto brep = update_boxes(boxes, paste, 3);
    deleted_boxes += brep.removed.size();
    if (brep.removed != want_deleted) return fail(fmt::format("scene {}: box deletions differ", trial));
    if (boxes.size() != img.objects.size() - want_deleted.size() + 1 || boxes.back().box != pasted_box)
      return fail(fmt::format("scene {}: box list differs", trial));
  }
  return {removed > 0 && deleted_boxes > 0,
          fmt::format("500 scenes, {} instance discards, {} box deletions", removed, deleted_boxes)};
}

// Weak instances

LabelMap fill(LabelMap m, const PixelRect& r, std::uint8_t cls) {
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) m.at(x, y) = cls;
  return m;
}

/// True when some order of the boxes reproduces `out` under first-match.
bool explained_by_some_order(const LabelMap& sem, const std::vector<ObjectAnnotation>& boxes,
                             const std::vector<ObjectAnnotation>& out) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  do {
    bool ok = true;
    for (int y = 0; y < sem.height() && ok; ++y)
      for (int x = 0; x < sem.width() && ok; ++x) {
        std::optional<std::size_t> owner;
        for (std::size_t k : order)
          if (boxes[k].class_id == sem.at(x, y) && boxes[k].box.contains(Point{x + 0.5, y + 0.5})) {
            owner = k;
            break;
          }
        for (std::size_t k = 0; k < boxes.size(); ++k)
          if ((out[k].mask->at(x, y) != 0) != (owner == k)) ok = false;
      }
    if (ok) return true;
  } while (std::next_permutation(order.begin(), order.end()));
  return false;
}

Outcome weak() {
  auto box = [](int cls, double x0, double y0, double x1, double y1) {
    return ObjectAnnotation{cls, Box::make(x0, y0, x1, y1), std::nullopt, false, false};
  };
  struct Fixture {
    LabelMap sem;
    std::vector<ObjectAnnotation> boxes;
  };
  std::vector<Fixture> fixtures;
  fixtures.push_back({fill(LabelMap(40, 20), {0, 0, 40, 10}, 1), {box(1, 0, 0, 25, 10), box(1, 15, 0, 40, 10)}});
  fixtures.push_back({fill(fill(LabelMap(50, 50), {5, 5, 30, 30}, 1), {20, 20, 45, 45}, 2),
                      {box(1, 0, 0, 35, 35), box(2, 15, 15, 50, 50), box(1, 10, 10, 40, 40)}});
  fixtures.push_back({fill(LabelMap(30, 30), {0, 0, 30, 30}, 1),
                      {box(1, 0, 0, 20, 20), box(1, 10, 10, 30, 30), box(1, 5, 5, 25, 25), box(2, 0, 0, 30, 30)}});
  std::size_t orders = 0;
  for (std::size_t f = 0; f < fixtures.size(); ++f) {
    std::set<std::vector<std::size_t>> areas;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      Rng rng(seed);
      const auto out = approximate(fixtures[f].sem, fixtures[f].boxes, rng);
      if (!explained_by_some_order(fixtures[f].sem, fixtures[f].boxes, out))
        return fail(fmt::format("fixture {} seed {}: no box order explains the masks", f, seed));
      std::vector<std::size_t> a;
      for (const auto& o : out) a.push_back(mask_area(*o.mask));
      areas.insert(a);
    }
    orders += areas.size();
  }

  auto masked = [](int bw, int bh, int mw, int mh) {
    ObjectAnnotation o{1, Box::make(0, 0, bw, bh), Mask(200, 200), false, false};
    for (int y = 0; y < mh; ++y)
      for (int x = 0; x < mw; ++x) o.mask->at(x, y) = 1;
    return o;
  };
  if (!quality_filter(masked(100, 100, 40, 100))) return fail("exactly 40% coverage was dropped");
  if (quality_filter(masked(100, 100, 39, 100))) return fail("39% coverage was kept");
  if (!quality_filter(masked(100, 50, 80, 50))) return fail("80% coverage was dropped");
  if (quality_filter(masked(100, 100, 0, 0))) return fail("empty mask was kept");
  return {orders > fixtures.size(), fmt::format("3 fixtures x 30 orders, {} distinct outcomes; 40% edge exact", orders)};
}

// Determinism

Outcome determinism() {
  SceneOptions o;
  o.width = 160;
  o.height = 120;
  o.max_side = 30;
  const Dataset ds = scene_dataset(50, 111, o);
  AugmentConfig c;
  c.paste_probability = 1.0;
  c.seed = 112;
  c.min_pixels = 16;
  c.scorer = "oracle";
  const fs::path out = temp_dir("accept-determinism");
  OracleScorer oracle(ds);
  c.workers = 1;
  const auto a = augment_dataset(ds, c, &oracle, out / "w1");
  c.workers = 8;
  augment_dataset(ds, c, &oracle, out / "w8");
  const std::string d1 = tree_digest(out / "w1"), d8 = tree_digest(out / "w8");
  fs::remove_all(out);
  return {d1 == d8 && a.pastes > 0, fmt::format("{} pastes, digests {} {}", a.pastes, d1.substr(0, 12), d8.substr(0, 12))};
}

// Context versus random placement

Outcome contrast() {
  SceneOptions o;
  o.width = 160;
  o.height = 120;
  o.max_side = 30;
  const Dataset ds = scene_dataset(100, 113, o);
  std::size_t near[2] = {0, 0}, total[2] = {0, 0};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (int m = 0; m < 2; ++m) {
      AugmentConfig c;
      c.mode = m == 0 ? AugmentMode::context : AugmentMode::random;
      c.paste_probability = 1.0;
      c.seed = seed;
      c.min_pixels = 16;
      const AugmentResources res = build_resources(ds, c);
      OracleScorer oracle(ds);
      std::unique_ptr<CandidateSelector> sel;
      if (m == 0)
        sel = std::make_unique<ContextSelector>(oracle, SelectOptions{});
      else
        sel = std::make_unique<RandomSelector>(res.db, c.max_placements);
      for (std::size_t i = 0; i < ds.images.size(); ++i) {
        const auto r = augment_image(ds.images[i], i, ds.images.size(), c, res, sel.get());
        for (const auto& p : r.decision.pastes) {
          ++total[m];
          near[m] += std::any_of(ds.images[i].objects.begin(), ds.images[i].objects.end(), [&](const auto& g) {
            return g.class_id == p.class_id && iou(g.box, p.box) >= 0.3;
          });
        }
      }
    }
  }
  if (total[0] == 0 || total[1] == 0) return fail("no pastes");
  const double ctx = static_cast<double>(near[0]) / total[0], rnd = static_cast<double>(near[1]) / total[1];
  return {ctx >= 0.8 && rnd <= 0.2,
          fmt::format("context {:.3f} of {} (>=0.80), random {:.3f} of {} (<=0.20)", ctx, total[0], rnd, total[1])};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> criteria{
      {"geometry-oracle", 1.0, geometry},
      {"rle-codec", 5.0, rle},
      {"contextual-invariants", 30.0, contextual},
      {"matching-rule", 10.0, matching},
      {"selection-semantics", 10.0, selection},
      {"annotation-update", 30.0, annotation},
      {"weak-instances", 5.0, weak},
      {"determinism", 120.0, determinism},
      {"context-vs-random", 300.0, contrast},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = c.check();
    } catch (const std::exception& e) {
      r = fail(std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s < c.limit_s;
    const bool pass = r.pass && in_time;
    failed += !pass;
    std::cout << fmt::format("{} {}: {}; {:.2f}s (limit {:.0f}s{})", pass ? "PASS" : "FAIL", c.name, r.detail, s,
                             c.limit_s, in_time ? "" : ", exceeded")
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - static_cast<std::size_t>(failed),
                           criteria.size())
            << std::endl;
  return failed == 0 ? 0 : 1;
}
