#include "ctxaug/shape_model.hpp"

#include <algorithm>
#include <cmath>

#include "ctxaug/error.hpp"

namespace ctxaug {

namespace {

std::vector<double> uniform_edges(double lo, double hi, int bins) {
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * i / bins;
  return e;
}

int find_bin(const std::vector<double>& edges, double v) {
  const int bins = static_cast<int>(edges.size()) - 1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  const int b = static_cast<int>(it - edges.begin()) - 1;
  return std::clamp(b, 0, bins - 1);
}

}  // namespace

ShapeHistogram::ShapeHistogram(int scale_bins, int aspect_bins)
    : scale_edges_(uniform_edges(0.0, 1.0, scale_bins)),
      log_aspect_edges_(uniform_edges(-kLogAspectRange, kLogAspectRange, aspect_bins)),
      counts_(static_cast<std::size_t>(scale_bins) * aspect_bins, 0) {
  if (scale_bins < 1 || aspect_bins < 1) throw PreconditionError("histogram needs at least one bin per axis");
}

int ShapeHistogram::bin_of(ShapeParams p) const noexcept {
  const int s = find_bin(scale_edges_, p.scale);
  const int a = find_bin(log_aspect_edges_, std::log2(p.aspect));
  return s * aspect_bins() + a;
}

double ShapeHistogram::probability(int flat_bin) const {
  if (total_ == 0) throw EmptyDistribution("histogram is empty");
  return static_cast<double>(counts_.at(static_cast<std::size_t>(flat_bin))) / static_cast<double>(total_);
}

void ShapeHistogram::add(ShapeParams p) {
  if (!(p.scale > 0) || !(p.aspect > 0) || !std::isfinite(p.scale) || !std::isfinite(p.aspect))
    throw PreconditionError("invalid shape parameters");
  ++counts_[static_cast<std::size_t>(bin_of(p))];
  ++total_;
}

ShapeParams ShapeHistogram::sample_shape(Rng& rng) const {
  if (total_ == 0) throw EmptyDistribution("cannot sample from an empty shape histogram");
  std::uint64_t target = rng.below(total_);
  std::size_t flat = 0;
  for (; flat < counts_.size(); ++flat) {
    if (target < counts_[flat]) break;
    target -= counts_[flat];
  }
  const int s = static_cast<int>(flat) / aspect_bins();
  const int a = static_cast<int>(flat) % aspect_bins();
  const double s_lo = scale_edges_[s], s_hi = scale_edges_[s + 1];
  // (lo, hi] keeps the scale strictly positive.
  const double scale = s_hi - (s_hi - s_lo) * rng.uniform();
  const double log_aspect = rng.uniform(log_aspect_edges_[a], log_aspect_edges_[a + 1]);
  return {scale, std::exp2(log_aspect)};
}

nlohmann::json ShapeHistogram::to_json() const {
  nlohmann::json counts = nlohmann::json::array();
  for (int s = 0; s < scale_bins(); ++s) {
    std::vector<std::uint64_t> row(counts_.begin() + s * aspect_bins(), counts_.begin() + (s + 1) * aspect_bins());
    counts.push_back(row);
  }
  return {{"scale_edges", scale_edges_},
          {"log2_aspect_edges", log_aspect_edges_},
          {"counts", counts},
          {"total", total_}};
}

ShapeHistogram ShapeHistogram::from_json(const nlohmann::json& j) {
  try {
    ShapeHistogram h(1, 1);
    h.scale_edges_ = j.at("scale_edges").get<std::vector<double>>();
    h.log_aspect_edges_ = j.at("log2_aspect_edges").get<std::vector<double>>();
    const auto rows = j.at("counts").get<std::vector<std::vector<std::uint64_t>>>();
    if (h.scale_edges_.size() < 2 || h.log_aspect_edges_.size() < 2 ||
        rows.size() != h.scale_edges_.size() - 1 ||
        !std::is_sorted(h.scale_edges_.begin(), h.scale_edges_.end()) ||
        !std::is_sorted(h.log_aspect_edges_.begin(), h.log_aspect_edges_.end()))
      throw ParseError("shape histogram: inconsistent edges/counts");
    h.counts_.clear();
    h.total_ = 0;
    for (const auto& row : rows) {
      if (row.size() != h.log_aspect_edges_.size() - 1) throw ParseError("shape histogram: ragged counts");
      for (auto c : row) {
        h.counts_.push_back(c);
        h.total_ += c;
      }
    }
    if (j.contains("total") && j["total"].get<std::uint64_t>() != h.total_)
      throw ParseError("shape histogram: total does not match counts");
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("shape histogram: ") + e.what());
  }
}

ShapeHistogram fit_shapes(std::span<const AnnotatedImage> images, int scale_bins, int aspect_bins) {
  ShapeHistogram h(scale_bins, aspect_bins);
  for (const auto& img : images)
    for (const auto& o : img.objects)
      if (!o.is_crowd) h.add(shape_params(o.box, img.width(), img.height()));
  if (h.total() == 0) throw EmptyDistribution("dataset has no ground-truth boxes");
  return h;
}

Box sample_box(const ShapeHistogram& hist, int image_w, int image_h, Rng& rng, int max_tries) {
  for (int t = 0; t < max_tries; ++t) {
    const ShapeParams p = hist.sample_shape(rng);
    auto [w, h] = shape_extent(p, image_w, image_h);
    constexpr double tol = 1e-9;
    if (w > image_w * (1 + tol) || h > image_h * (1 + tol)) continue;
    w = std::min(w, static_cast<double>(image_w));
    h = std::min(h, static_cast<double>(image_h));
    const double cx = rng.uniform(w / 2, image_w - w / 2);
    const double cy = rng.uniform(h / 2, image_h - h / 2);
    Box b{cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
    b.x_min = std::max(b.x_min, 0.0);
    b.y_min = std::max(b.y_min, 0.0);
    b.x_max = std::min(b.x_max, static_cast<double>(image_w));
    b.y_max = std::min(b.y_max, static_cast<double>(image_h));
    return b;
  }
  throw NoFit("no sampled shape fits a " + std::to_string(image_w) + "x" + std::to_string(image_h) +
              " image after " + std::to_string(max_tries) + " tries");
}

}  // namespace ctxaug
