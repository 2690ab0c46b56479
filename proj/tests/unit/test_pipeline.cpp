#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "ctxaug/error.hpp"
#include "ctxaug/image_codec.hpp"
#include "ctxaug/pipeline.hpp"
#include "fixtures.hpp"

using namespace ctxaug;
using namespace ctxaug::testing;
namespace fs = std::filesystem;

namespace {

AugmentConfig config(AugmentMode mode, double p0, std::uint64_t seed = 1) {
  AugmentConfig c;
  c.mode = mode;
  c.paste_probability = p0;
  c.seed = seed;
  c.min_pixels = 16;
  c.scorer = mode == AugmentMode::context ? "oracle" : "";
  return c;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_lines(const fs::path& p) {
  const std::string t = read_text(p);
  return static_cast<std::size_t>(std::count(t.begin(), t.end(), '\n'));
}

/// Scenes with one class per object and roomy backgrounds.
Dataset roomy(std::size_t n, std::uint64_t seed) {
  SceneOptions o;
  o.width = 160;
  o.height = 120;
  o.max_side = 30;
  return scene_dataset(n, seed, o);
}

}  // namespace

TEST(Config, ValidationAndHash) {
  AugmentConfig c;
  EXPECT_NO_THROW(c.validate());
  for (auto bad : {-0.1, 1.1}) {
    AugmentConfig b;
    b.paste_probability = bad;
    EXPECT_THROW(b.validate(), ConfigError);
  }
  AugmentConfig t;
  t.threshold = 1.0;
  EXPECT_THROW(t.validate(), ConfigError);
  AugmentConfig w;
  w.workers = 0;
  EXPECT_THROW(w.validate(), ConfigError);

  AugmentConfig a, b;
  b.workers = 8;
  b.dump_candidates = "/tmp/x";
  EXPECT_EQ(a.hash(), b.hash());
  b.seed = 9;
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 64u);
}

TEST(Config, NamesRoundTrip) {
  for (auto m : {AugmentMode::context, AugmentMode::random, AugmentMode::enlarge}) EXPECT_EQ(parse_mode(to_string(m)), m);
  for (auto s : {Schedule::constant, Schedule::linear_decay}) EXPECT_EQ(parse_schedule(to_string(s)), s);
  EXPECT_THROW(parse_mode("poisson"), ConfigError);
  EXPECT_THROW(parse_regime("big_data"), ConfigError);
}

TEST(Schedule, Values) {
  EXPECT_DOUBLE_EQ(paste_probability(0.5, Schedule::constant, 7, 10), 0.5);
  EXPECT_DOUBLE_EQ(paste_probability(0.5, Schedule::linear_decay, 0, 10), 0.5);
  EXPECT_DOUBLE_EQ(paste_probability(0.5, Schedule::linear_decay, 5, 10), 0.25);
  EXPECT_DOUBLE_EQ(paste_probability(0.5, Schedule::linear_decay, 9, 10), 0.05);
}

TEST(Schedule, LinearDecayCountOverThousandImages) {
  // gate only: enlarge mode on mask-less images never pastes
  Dataset ds;
  ds.categories = numbered_categories(1);
  for (int i = 0; i < 1000; ++i) {
    AnnotatedImage img;
    img.image_id = "g" + std::to_string(i);
    img.pixels = RgbImage(4, 4);
    ds.images.push_back(std::move(img));
  }
  AugmentConfig c = config(AugmentMode::enlarge, 0.5, 77);
  c.schedule = Schedule::linear_decay;
  const AugmentResources none{ShapeHistogram(), InstanceDatabase()};
  double mean = 0, var = 0;
  std::size_t drawn = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const double p = paste_probability(0.5, Schedule::linear_decay, i, 1000);
    mean += p;
    var += p * (1 - p);
    drawn += augment_image(ds.images[i], i, 1000, c, none, nullptr).decision.drawn;
  }
  EXPECT_NEAR(mean, 250.25, 1e-9);
  EXPECT_LE(3 * std::sqrt(var), 45.0);
  EXPECT_NEAR(static_cast<double>(drawn), 250.0, 45.0);
}

TEST(AugmentDataset, ZeroProbabilityIsIdentity) {
  const Dataset ds = roomy(8, 1);
  const auto out = temp_dir("p0");
  const auto summary = augment_dataset(ds, config(AugmentMode::random, 0.0), nullptr, out / "ds");
  EXPECT_EQ(summary.augmented, 0u);
  const Dataset back = load_written(out / "ds", DatasetFormat::coco);
  ASSERT_EQ(back.images.size(), ds.images.size());
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    EXPECT_EQ(back.images[i].image_id, ds.images[i].image_id);
    EXPECT_EQ(back.images[i].pixels, ds.images[i].pixels);
    ASSERT_EQ(back.images[i].objects.size(), ds.images[i].objects.size());
    for (std::size_t j = 0; j < ds.images[i].objects.size(); ++j)
      EXPECT_EQ(*back.images[i].objects[j].mask, *ds.images[i].objects[j].mask);
  }
  // written originals are the PNG bytes of the input pixels
  write_png(out / "ref.png", ds.images[0].pixels);
  EXPECT_EQ(read_text(out / "ds" / "images" / "img0000.png"), read_text(out / "ref.png"));
}

TEST(AugmentImage, ProbabilityOneWithOracle) {
  const Dataset ds = roomy(20, 2);
  const AugmentConfig c = config(AugmentMode::context, 1.0);
  const AugmentResources res = build_resources(ds, c);
  OracleScorer oracle(ds);
  ContextSelector sel(oracle, {});
  std::size_t augmented = 0;
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    const auto r = augment_image(ds.images[i], i, ds.images.size(), c, res, &sel);
    EXPECT_TRUE(r.decision.drawn);
    EXPECT_LE(r.decision.pastes.size(), 2u);
    EXPECT_LE(r.kept.size(), 2u);
    // a kept candidate either pasted or left a note explaining why not
    EXPECT_EQ(r.decision.pastes.size() + r.decision.notes.size(), r.kept.size());
    if (r.augmented) {
      ++augmented;
      EXPECT_GE(r.decision.pastes.size(), 1u);
      EXPECT_EQ(r.augmented->image_id, ds.images[i].image_id + "_aug");
      EXPECT_TRUE(check_image(*r.augmented, 3));
      std::size_t synthetic = 0;
      for (const auto& o : r.augmented->objects) synthetic += o.is_synthetic;
      EXPECT_EQ(synthetic, r.decision.pastes.size());
    }
  }
  EXPECT_GT(augmented, 10u);
}

TEST(AugmentDataset, ByteIdenticalAcrossWorkerCounts) {
  const Dataset ds = roomy(12, 3);
  const auto out = temp_dir("workers");
  OracleScorer oracle(ds);
  AugmentConfig c = config(AugmentMode::context, 0.7, 5);
  c.workers = 1;
  augment_dataset(ds, c, &oracle, out / "w1");
  c.workers = 4;
  augment_dataset(ds, c, &oracle, out / "w4");
  EXPECT_EQ(tree_digest(out / "w1"), tree_digest(out / "w4"));
  c.workers = 1;
  augment_dataset(ds, c, &oracle, out / "again");
  EXPECT_EQ(tree_digest(out / "w1"), tree_digest(out / "again"));
}

TEST(AugmentDataset, RandomModeEqualsContextModeWithInjectedSelector) {
  const Dataset ds = roomy(10, 4);
  const auto out = temp_dir("inject");
  const AugmentConfig rc = config(AugmentMode::random, 1.0, 6);
  AugmentConfig cc = config(AugmentMode::context, 1.0, 6);
  AugmentHooks hooks;
  hooks.selector = [&](const AugmentResources& res) { return std::make_unique<RandomSelector>(res.db, 2); };
  const auto a = augment_dataset(ds, rc, nullptr, out / "random");
  const auto b = augment_dataset(ds, cc, nullptr, out / "context", hooks);
  EXPECT_GT(a.pastes, 0u);
  EXPECT_EQ(a.manifest.extra["decisions"], b.manifest.extra["decisions"]);
  EXPECT_EQ(a.manifest.files, b.manifest.files);
  for (const auto& f : a.manifest.files) {
    if (f == "manifest.json") continue;
    EXPECT_EQ(read_text(out / "random" / f), read_text(out / "context" / f)) << f;
  }
}

TEST(AugmentDataset, PasteCountsBoundedAndMatchStats) {
  const Dataset ds = roomy(15, 5);
  const auto out = temp_dir("bounded");
  const auto s = augment_dataset(ds, config(AugmentMode::random, 1.0, 7), nullptr, out / "ds");
  std::size_t total = 0;
  for (const auto& d : s.manifest.extra["decisions"]) {
    EXPECT_LE(d["pastes"].size(), 2u);
    total += d["pastes"].size();
  }
  EXPECT_EQ(total, s.pastes);
  const auto stats = dataset_stats(load_written(out / "ds", DatasetFormat::coco));
  EXPECT_EQ(stats["synthetic"].get<std::size_t>(), s.pastes);
  EXPECT_EQ(stats["images"].get<std::size_t>(), ds.images.size() + s.augmented);
}

TEST(AugmentDataset, EnlargeModeTouchesEveryMaskedInstance) {
  const Dataset ds = roomy(6, 8);
  const auto out = temp_dir("enlarge");
  const auto s = augment_dataset(ds, config(AugmentMode::enlarge, 1.0, 9), nullptr, out / "ds");
  std::size_t objects = 0;
  for (const auto& img : ds.images) objects += img.objects.size();
  EXPECT_EQ(s.augmented, ds.images.size());
  EXPECT_EQ(s.pastes, objects);
}

TEST(AugmentDataset, ScorerFailureLeavesNoOutput) {
  const Dataset ds = roomy(4, 10);
  const auto out = temp_dir("abort");
  ScriptedScorer failing(3, [](const ContextualImage&, std::size_t) -> ScoreVector {
    throw ScorerUnavailable("scripted outage");
  });
  EXPECT_THROW(augment_dataset(ds, config(AugmentMode::context, 1.0), &failing, out / "ds"), ScorerUnavailable);
  EXPECT_FALSE(fs::exists(out / "ds"));
  EXPECT_FALSE(fs::exists(out / "ds.partial"));
}

TEST(AugmentDataset, ConfigErrors) {
  const Dataset ds = roomy(2, 11);
  const auto out = temp_dir("cfgerr");
  EXPECT_THROW(augment_dataset(ds, config(AugmentMode::context, 1.0), nullptr, out / "a"), ConfigError);
  UniformScorer wrong(7);
  EXPECT_THROW(augment_dataset(ds, config(AugmentMode::context, 1.0), &wrong, out / "b"), ConfigError);
}

TEST(BalanceSplit, TenCatsSplitFiveFive) {
  Dataset ds;
  ds.categories = numbered_categories(2);
  for (int i = 0; i < 10; ++i) {
    AnnotatedImage img;
    img.image_id = "cat" + std::to_string(i);
    img.pixels = RgbImage(8, 8);
    img.objects.push_back({1, Box::make(0, 0, 4, 4), std::nullopt, false, false});
    ds.images.push_back(std::move(img));
  }
  const auto side = balance_split(ds.images, 2, 3);
  EXPECT_EQ(std::accumulate(side.begin(), side.end(), 0), 5);
}

TEST(BalanceSplit, PerClassWithinOneOnScenes) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SceneOptions o;
    o.num_classes = 5;
    o.max_objects = 4;
    const Dataset ds = scene_dataset(60, seed, o);
    const auto side = balance_split(ds.images, 5, seed);
    std::vector<long long> diff(6);
    for (std::size_t i = 0; i < side.size(); ++i)
      for (const auto& obj : ds.images[i].objects) diff[obj.class_id] += side[i] == 0 ? 1 : -1;
    for (int c = 1; c <= 5; ++c) EXPECT_LE(std::llabs(diff[c]), 1) << "seed " << seed << " class " << c;
  }
}

TEST(ExportContextSet, SmallAndNormalRegimes) {
  SceneOptions o;
  o.width = 200;
  o.height = 200;
  o.max_side = 30;
  o.max_objects = 2;
  const Dataset ds = scene_dataset(10, 12, o);
  const auto out = temp_dir("export");
  AugmentConfig c;
  c.seed = 13;

  const auto small = export_context_set(ds, c, ContextRegime::small_data, out / "small");
  ASSERT_EQ(small.splits.size(), 1u);
  EXPECT_EQ(small.splits[0].name, "all");
  EXPECT_EQ(small.splits[0].backgrounds, 3 * small.splits[0].positives);
  std::size_t pngs = 0;
  for (const auto& e : fs::directory_iterator(out / "small" / "all" / "images")) pngs += e.path().extension() == ".png";
  EXPECT_EQ(count_lines(out / "small" / "all" / "labels.csv"), pngs + 1);  // header
  EXPECT_EQ(pngs, small.splits[0].positives + small.splits[0].backgrounds);
  EXPECT_EQ(read_text(out / "small" / "all" / "labels.csv").substr(0, 22), "path,label\nimages/0000");

  const auto normal = export_context_set(ds, c, ContextRegime::normal_data, out / "normal");
  ASSERT_EQ(normal.splits.size(), 2u);
  for (int k = 1; k <= 3; ++k) {
    const auto a = static_cast<long long>(normal.splits[0].per_class[k]);
    const auto b = static_cast<long long>(normal.splits[1].per_class[k]);
    EXPECT_LE(std::llabs(a - b), 1) << k;
  }
  for (const auto& s : normal.splits) {
    EXPECT_EQ(s.backgrounds, 3 * s.positives);
    EXPECT_EQ(count_lines(out / "normal" / s.name / "labels.csv"), s.positives + s.backgrounds + 1);
  }
  EXPECT_THROW(export_context_set(ds, c, ContextRegime::small_data, out / "small"), IoError);
}

TEST(Stats, KnownCountsAndEmptyDataset) {
  Dataset ds;
  ds.categories = numbered_categories(3);
  AnnotatedImage img;
  img.image_id = "a";
  img.pixels = RgbImage(50, 50);
  img.objects = {{1, Box::make(0, 0, 10, 10), std::nullopt, false, false},
                 {1, Box::make(20, 20, 30, 30), std::nullopt, true, false},
                 {3, Box::make(5, 5, 25, 15), std::nullopt, false, false}};
  ds.images.push_back(img);
  const auto s = dataset_stats(ds);
  EXPECT_EQ(s["objects"], 3);
  EXPECT_EQ(s["synthetic"], 1);
  EXPECT_EQ(s["classes"][0]["instances"], 2);
  EXPECT_EQ(s["classes"][0]["synthetic"], 1);
  EXPECT_EQ(s["classes"][1]["instances"], 0);
  EXPECT_EQ(s["classes"][2]["instances"], 1);
  EXPECT_EQ(s["shape_histogram"]["total"], 3);

  Dataset empty;
  const auto e = dataset_stats(empty);
  EXPECT_EQ(e["images"], 0);
  EXPECT_TRUE(e["shape_histogram"].is_null());
}

TEST(Validate, DetectsProblems) {
  Dataset ds = roomy(3, 14);
  EXPECT_TRUE(validate_dataset(ds).empty());
  ds.images.push_back(ds.images[0]);
  ds.images[1].objects[0].box = Box::make(0, 0, 500, 500);
  const auto problems = validate_dataset(ds);
  EXPECT_GE(problems.size(), 2u);
}

TEST(Preview, DeterministicAndMatchesTheDump) {
  const Dataset ds = roomy(6, 15);
  const auto out = temp_dir("preview");
  OracleScorer oracle(ds);
  AugmentConfig c = config(AugmentMode::context, 1.0, 16);
  c.dump_candidates = out / "dump";
  augment_dataset(ds, c, &oracle, out / "ds");
  c.dump_candidates.reset();
  const std::string id = ds.images[2].image_id;
  const auto files = preview(ds, id, c, &oracle, out / "p1");
  preview(ds, id, c, &oracle, out / "p2");
  EXPECT_EQ(tree_digest(out / "p1"), tree_digest(out / "p2"));
  const auto doc = nlohmann::json::parse(read_text(files.candidates));
  EXPECT_EQ(doc["candidates"], nlohmann::json::parse(read_text(out / "dump" / (id + ".json"))));
  EXPECT_THROW(preview(ds, "nope", c, &oracle, out / "p3"), NotFound);
}

TEST(Preview, UnaugmentedImageGivesIdenticalHalves) {
  const Dataset ds = roomy(2, 17);
  const auto out = temp_dir("preview0");
  const auto files = preview(ds, ds.images[0].image_id, config(AugmentMode::random, 0.0), nullptr, out);
  const RgbImage sbs = read_image(files.side_by_side);
  const int w = ds.images[0].width();
  ASSERT_EQ(sbs.width(), 2 * w);
  for (int y = 0; y < sbs.height(); ++y)
    for (int x = 0; x < w; ++x) ASSERT_EQ(get_rgb(sbs, x, y), get_rgb(sbs, x + w, y));
}
