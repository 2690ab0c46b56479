#include "ctxaug/placement.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>

#include "ctxaug/error.hpp"

namespace ctxaug {

std::vector<PlacementCandidate> propose(const AnnotatedImage& image, const ShapeHistogram& hist, Rng& rng,
                                        const ProposeOptions& opts) {
  std::vector<PlacementCandidate> out;
  out.reserve(static_cast<std::size_t>(opts.num_candidates) + image.objects.size() * 2);
  int dropped = 0;
  for (int i = 0; i < opts.num_candidates; ++i) {
    try {
      PlacementCandidate c;
      c.box = sample_box(hist, image.width(), image.height(), rng, opts.max_tries);
      out.push_back(std::move(c));
    } catch (const NoFit&) {
      ++dropped;
    }
  }
  if (dropped > 0) spdlog::warn("{}: {} sampled candidates did not fit and were dropped", image.image_id, dropped);

  for (const auto& o : image.objects) {
    if (o.is_crowd) continue;
    for (int n = 0; n < opts.neighbors_per_object; ++n) {
      const double w = o.box.width() * rng.uniform(opts.neighbor_min_scale, opts.neighbor_max_scale);
      const double h = o.box.height() * rng.uniform(opts.neighbor_min_scale, opts.neighbor_max_scale);
      const Point c = o.box.center();
      const double cx = c.x + rng.uniform(-opts.neighbor_shift, opts.neighbor_shift) * o.box.width();
      const double cy = c.y + rng.uniform(-opts.neighbor_shift, opts.neighbor_shift) * o.box.height();
      auto clipped = clip_box(Box{cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2}, image.width(), image.height());
      if (!clipped || clipped->width() < 1.0 || clipped->height() < 1.0) continue;
      PlacementCandidate nb;
      nb.box = *clipped;
      nb.origin = CandidateOrigin::neighbor;
      out.push_back(std::move(nb));
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].index = i;
  return out;
}

void score_candidates(std::vector<PlacementCandidate>& candidates, const AnnotatedImage& image, Scorer& scorer,
                      const SelectOptions& opts, Rng& rng) {
  std::vector<Box> boxes;
  boxes.reserve(candidates.size());
  for (const auto& c : candidates) boxes.push_back(c.box);
  auto scores = averaged_scores(image, boxes, opts.variants, rng, scorer, opts.context);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& c = candidates[i];
    c.scores = std::move(scores[i]);
    c.selected_class.reset();
    int best = 0;
    for (int k = 1; k <= c.scores->num_classes(); ++k)
      if (best == 0 || (*c.scores)[static_cast<std::size_t>(k)] > (*c.scores)[static_cast<std::size_t>(best)]) best = k;
    if (best > 0 && (*c.scores)[static_cast<std::size_t>(best)] > opts.threshold) c.selected_class = best;
  }
}

namespace {

struct SubsetSearch {
  std::span<const PlacementCandidate> ranked;
  std::size_t limit;
  double max_iou;
  std::vector<std::size_t> current, best;
  double current_sum = 0.0, best_sum = -1.0;

  bool compatible(std::size_t i) const {
    return std::all_of(current.begin(), current.end(),
                       [&](std::size_t j) { return iou(ranked[i].box, ranked[j].box) < max_iou; });
  }

  void run(std::size_t pos) {
    if (current_sum > best_sum) {
      best_sum = current_sum;
      best = current;
    }
    if (current.size() == limit) return;
    for (std::size_t i = pos; i < ranked.size(); ++i) {
      // Scores are non-increasing from i on, so this bounds every extension.
      const double bound = current_sum + static_cast<double>(limit - current.size()) * ranked[i].score();
      if (bound <= best_sum) return;
      if (!compatible(i)) continue;
      current.push_back(i);
      current_sum += ranked[i].score();
      run(i + 1);
      current_sum -= ranked[i].score();
      current.pop_back();
    }
  }
};

}  // namespace

std::vector<PlacementCandidate> choose_placements(std::span<const PlacementCandidate> candidates,
                                                  const SelectOptions& opts) {
  std::vector<PlacementCandidate> ranked;
  for (const auto& c : candidates)
    if (c.selected_class) ranked.push_back(c);
  std::stable_sort(ranked.begin(), ranked.end(), [](const PlacementCandidate& a, const PlacementCandidate& b) {
    if (a.score() != b.score()) return a.score() > b.score();
    return a.index < b.index;
  });
  if (ranked.empty() || opts.max_placements <= 0) return {};

  SubsetSearch search{ranked, static_cast<std::size_t>(opts.max_placements), opts.max_pair_iou, {}, {}};
  search.run(0);
  std::vector<PlacementCandidate> kept;
  for (std::size_t i : search.best) kept.push_back(ranked[i]);
  return kept;
}

std::vector<PlacementCandidate> select(std::vector<PlacementCandidate>& candidates, const AnnotatedImage& image,
                                       Scorer& scorer, const SelectOptions& opts, Rng& rng) {
  score_candidates(candidates, image, scorer, opts, rng);
  return choose_placements(candidates, opts);
}

nlohmann::json candidates_to_json(const AnnotatedImage& image, std::span<const PlacementCandidate> candidates,
                                  std::span<const PlacementCandidate> kept) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : candidates) {
    const bool is_kept =
        std::any_of(kept.begin(), kept.end(), [&](const PlacementCandidate& k) { return k.index == c.index; });
    nlohmann::json j = {{"index", c.index},
                        {"box", {c.box.x_min, c.box.y_min, c.box.x_max, c.box.y_max}},
                        {"origin", c.origin == CandidateOrigin::sampled ? "sampled" : "neighbor"},
                        {"kept", is_kept}};
    j["scores"] = c.scores ? nlohmann::json(c.scores->values) : nlohmann::json(nullptr);
    j["selected_class"] = c.selected_class ? nlohmann::json(*c.selected_class) : nlohmann::json(nullptr);
    list.push_back(std::move(j));
  }
  return {{"image_id", image.image_id}, {"width", image.width()}, {"height", image.height()}, {"candidates", list}};
}

}  // namespace ctxaug
