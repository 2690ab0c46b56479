#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxaug/blender.hpp"
#include "ctxaug/dataset.hpp"
#include "ctxaug/dataset_io.hpp"
#include "ctxaug/instance_db.hpp"
#include "ctxaug/placement.hpp"
#include "ctxaug/scorer.hpp"
#include "ctxaug/shape_model.hpp"

namespace ctxaug {

enum class AugmentMode { context, random, enlarge };
enum class Schedule { constant, linear_decay };

std::string to_string(AugmentMode m);
std::string to_string(Schedule s);
AugmentMode parse_mode(const std::string& s);
Schedule parse_schedule(const std::string& s);

struct AugmentConfig {
  AugmentMode mode = AugmentMode::context;
  double paste_probability = 0.5;
  Schedule schedule = Schedule::constant;
  int max_placements = 2;
  double threshold = 0.7;
  int variants = 3;
  int candidates = 200;
  double bg_ratio = 3.0;
  std::uint64_t seed = 0;
  std::string scorer;  ///< uniform | oracle | process:<cmd> | tcp:<host:port>
  DatasetFormat format_in = DatasetFormat::coco;
  DatasetFormat format_out = DatasetFormat::coco;
  std::size_t min_pixels = InstanceDatabase::kDefaultMinPixels;
  /// Approximate instance masks from semantic maps for objects without one.
  bool weak_masks = false;
  int workers = 1;
  std::optional<std::filesystem::path> dump_candidates;

  /// Throws ConfigError naming the first out-of-range field.
  void validate() const;
  /// Every field that can change the output; workers and the dump path are
  /// left out.
  nlohmann::json to_json() const;
  /// SHA-256 of the canonical to_json() text.
  std::string hash() const;
};

/// p0 for constant, p0 * (1 - index / count) for linear_decay.
double paste_probability(double p0, Schedule schedule, std::size_t index, std::size_t count);

struct PasteRecord {
  int class_id = 0;
  Box box;  ///< tight box of the pasted pixels
  std::string cutout_image;
  std::size_t cutout_object = 0;
  double scale = 1.0;
  BlendMode blend = BlendMode::none;
  std::optional<CandidateOrigin> origin;
  double score = 0.0;
  std::size_t removed_objects = 0;

  nlohmann::json to_json() const;
};

struct ImageDecision {
  std::string image_id;
  double probability = 0.0;
  bool drawn = false;  ///< the probability gate passed
  std::string augmented_id;  ///< empty when nothing was pasted
  std::vector<PasteRecord> pastes;
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
};

/// Picks placements among proposed candidates. The pipeline modes differ only
/// in this step.
class CandidateSelector {
 public:
  virtual ~CandidateSelector() = default;
  /// Returned candidates carry selected_class and are pasted in order.
  virtual std::vector<PlacementCandidate> choose(std::vector<PlacementCandidate>& candidates,
                                                 const AnnotatedImage& image, Rng& rng) = 0;
};

/// Scores candidates through the context model and keeps the best ones.
class ContextSelector final : public CandidateSelector {
 public:
  ContextSelector(Scorer& scorer, SelectOptions opts) : scorer_(scorer), opts_(opts) {}
  std::vector<PlacementCandidate> choose(std::vector<PlacementCandidate>& candidates, const AnnotatedImage& image,
                                         Rng& rng) override;

 private:
  Scorer& scorer_;
  SelectOptions opts_;
};

/// Baseline without context: walks the sampled candidates in order and gives
/// each a class drawn uniformly among the classes with a matching cutout,
/// keeping up to max_placements boxes with pairwise IoU < max_pair_iou.
class RandomSelector final : public CandidateSelector {
 public:
  RandomSelector(const InstanceDatabase& db, int max_placements, double max_pair_iou = 0.3)
      : db_(db), max_placements_(max_placements), max_pair_iou_(max_pair_iou) {}
  std::vector<PlacementCandidate> choose(std::vector<PlacementCandidate>& candidates, const AnnotatedImage& image,
                                         Rng& rng) override;

 private:
  const InstanceDatabase& db_;
  int max_placements_;
  double max_pair_iou_;
};

/// Shape histogram and cutout database shared by every image of a run.
struct AugmentResources {
  ShapeHistogram hist;
  InstanceDatabase db;
};

/// Builds the resources a mode needs (nothing for enlarge). Uses weak masks
/// when cfg.weak_masks is set.
AugmentResources build_resources(const Dataset& ds, const AugmentConfig& cfg);

struct ImageAugmentation {
  std::optional<AnnotatedImage> augmented;
  ImageDecision decision;
  std::vector<PlacementCandidate> candidates;
  std::vector<PlacementCandidate> kept;
};

/// Propose, select, match, blend and update annotations for one image. The
/// random streams depend only on (cfg.seed, image_id).
ImageAugmentation paste_objects(const AnnotatedImage& image, const AugmentResources& res,
                                CandidateSelector& selector, const AugmentConfig& cfg);

/// Enlarge-Reblend applied to every masked instance, in object order.
ImageAugmentation enlarge_objects(const AnnotatedImage& image, const AugmentConfig& cfg);

/// The probability gate followed by the mode's augmentation. `selector` is
/// ignored in enlarge mode.
ImageAugmentation augment_image(const AnnotatedImage& image, std::size_t index, std::size_t count,
                                const AugmentConfig& cfg, const AugmentResources& res,
                                CandidateSelector* selector);

struct AugmentHooks {
  /// Replaces the mode's selector (for context and random mode).
  std::function<std::unique_ptr<CandidateSelector>(const AugmentResources&)> selector;
};

struct AugmentSummary {
  Manifest manifest;
  std::size_t images = 0;
  std::size_t augmented = 0;
  std::size_t pastes = 0;
};

/// Writes every input image unchanged plus an `<id>_aug` copy for each image
/// that received at least one paste. Per-image decisions go to the manifest.
/// `scorer` is required in context mode. Any exception removes the partial
/// output.
AugmentSummary augment_dataset(const Dataset& ds, const AugmentConfig& cfg, Scorer* scorer,
                               const std::filesystem::path& out_dir, const AugmentHooks& hooks = {},
                               bool overwrite = false);

enum class ContextRegime { small_data, normal_data };
ContextRegime parse_regime(const std::string& s);

struct ContextExportSummary {
  struct Split {
    std::string name;
    std::size_t positives = 0;
    std::size_t backgrounds = 0;
    std::vector<std::size_t> per_class;  ///< positives indexed by class id
  };
  std::vector<Split> splits;
};

/// Contextual training images as `<out>/<split>/images/NNNNNN.png` with a
/// `<out>/<split>/labels.csv` (path,label). small_data writes one split
/// "all"; normal_data splits images into "a" and "b" balancing per-class
/// positives.
ContextExportSummary export_context_set(const Dataset& ds, const AugmentConfig& cfg, ContextRegime regime,
                                        const std::filesystem::path& out_dir, bool overwrite = false);

/// Image split for normal_data: images in seeded order, each sent to the
/// side that keeps the per-class positive counts closest, then refined by
/// single moves and swaps while the summed imbalance drops. Returns 0 / 1
/// per image.
std::vector<int> balance_split(std::span<const AnnotatedImage> images, int num_classes, std::uint64_t seed);

/// Per-class instance and synthetic counts plus the shape histogram.
nlohmann::json dataset_stats(const Dataset& ds);

/// Record-invariant problems over the whole dataset; empty means valid.
std::vector<std::string> validate_dataset(const Dataset& ds);

struct PreviewFiles {
  std::filesystem::path original, augmented, side_by_side, overlay, candidates;
};

/// Runs one image through augment_image and writes original.png,
/// augmented.png, side_by_side.png, candidates.png (all candidates grey,
/// above-threshold yellow, kept green) and candidates.json. Throws NotFound
/// for an unknown id.
PreviewFiles preview(const Dataset& ds, const std::string& image_id, const AugmentConfig& cfg, Scorer* scorer,
                     const std::filesystem::path& out_dir);

}  // namespace ctxaug
