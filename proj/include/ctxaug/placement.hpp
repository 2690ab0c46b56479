#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxaug/context_extract.hpp"
#include "ctxaug/dataset.hpp"
#include "ctxaug/rng.hpp"
#include "ctxaug/scorer.hpp"
#include "ctxaug/shape_model.hpp"

namespace ctxaug {

enum class CandidateOrigin { sampled, neighbor };

struct PlacementCandidate {
  Box box;
  CandidateOrigin origin = CandidateOrigin::sampled;
  std::optional<ScoreVector> scores;
  std::optional<int> selected_class;
  std::size_t index = 0;  ///< position in the proposal list

  /// Averaged score of the selected class (0 when none).
  double score() const { return selected_class && scores ? (*scores)[static_cast<std::size_t>(*selected_class)] : 0.0; }
};

struct ProposeOptions {
  int num_candidates = 200;
  int neighbors_per_object = 2;
  double neighbor_shift = 0.5;  ///< max centre shift, as a fraction of the box side
  double neighbor_min_scale = 0.9;
  double neighbor_max_scale = 1.1;
  int max_tries = 100;  ///< shape redraws per sampled candidate
};

/// num_candidates boxes from the shape distribution, then
/// neighbors_per_object jittered copies of every ground-truth box.
std::vector<PlacementCandidate> propose(const AnnotatedImage& image, const ShapeHistogram& hist, Rng& rng,
                                        const ProposeOptions& opts = {});

struct SelectOptions {
  double threshold = 0.7;
  int variants = 3;
  int max_placements = 2;
  double max_pair_iou = 0.3;
  ContextOptions context;
};

/// Scores every candidate with `variants`-fold averaging and sets
/// selected_class to the best non-background class when its score is strictly
/// above the threshold.
void score_candidates(std::vector<PlacementCandidate>& candidates, const AnnotatedImage& image, Scorer& scorer,
                      const SelectOptions& opts, Rng& rng);

/// Among candidates with a selected class, the subset of at most
/// max_placements pairwise IoU < max_pair_iou with the largest score sum.
/// Search runs over (score desc, index asc) order and keeps the first optimum,
/// so without conflicts this is simply the top max_placements. Returned in
/// that order.
std::vector<PlacementCandidate> choose_placements(std::span<const PlacementCandidate> candidates,
                                                  const SelectOptions& opts);

/// score_candidates followed by choose_placements.
std::vector<PlacementCandidate> select(std::vector<PlacementCandidate>& candidates, const AnnotatedImage& image,
                                       Scorer& scorer, const SelectOptions& opts, Rng& rng);

/// Debug dump: every candidate with its scores and whether it was kept.
nlohmann::json candidates_to_json(const AnnotatedImage& image, std::span<const PlacementCandidate> candidates,
                                  std::span<const PlacementCandidate> kept);

}  // namespace ctxaug
