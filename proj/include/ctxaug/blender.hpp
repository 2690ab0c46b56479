#pragma once

#include <array>
#include <optional>
#include <string>

#include "ctxaug/dataset.hpp"
#include "ctxaug/geometry.hpp"
#include "ctxaug/instance_db.hpp"
#include "ctxaug/rng.hpp"

namespace ctxaug {

enum class BlendMode { none, gaussian_edge, linear_edge, motion_blur };

inline constexpr std::array<BlendMode, 4> kBlendModes = {BlendMode::none, BlendMode::gaussian_edge,
                                                         BlendMode::linear_edge, BlendMode::motion_blur};

std::string to_string(BlendMode m);
BlendMode parse_blend_mode(const std::string& s);

struct BlendParams {
  double gaussian_sigma = 2.0;
  double ramp_width = 5.0;
  int motion_length = 7;
};

/// How far outside the pasted rectangle a mode may change pixels; motion blur
/// touches the whole image (returns -1).
int support_radius(BlendMode mode, const BlendParams& params = {});

struct BlendSpec {
  BlendMode mode = BlendMode::none;
  const InstanceCutout* cutout = nullptr;
  Box target_box;
  double scale = 1.0;
};

struct BlendResult {
  RgbImage image;
  Mask pasted_mask;     ///< pixels with alpha > 0.5
  PixelRect paste_rect; ///< where the resized cutout landed
  double motion_angle = 0.0;
};

/// Resizes the cutout by spec.scale (bilinear) and composites it centred on
/// the target box:
///   none          hard mask
///   gaussian_edge mask convolved with a Gaussian (sigma px)
///   linear_edge   alpha = min(1, distance-to-background / ramp)
///   motion_blur   hard paste, then a line kernel over the whole image at an
///                 angle drawn uniformly from [0, pi)
/// Throws PreconditionError when the scaled cutout does not fit in the image.
BlendResult blend(const RgbImage& image, const BlendSpec& spec, Rng& rng, const BlendParams& params = {});

struct EnlargeOptions {
  double min_factor = 1.2;
  double max_factor = 1.5;
  double colour_jitter = 0.1;  ///< per-channel factor drawn from [1 - j, 1 + j]
  /// Overrides, mainly for tests.
  std::optional<double> factor;
  std::optional<std::array<double, 3>> colour;
  std::optional<BlendMode> mode;
  BlendParams params;
};

struct EnlargeResult {
  RgbImage image;
  Mask pasted_mask;
  double factor = 1.0;
  BlendMode mode = BlendMode::none;
  std::array<double, 3> colour{1.0, 1.0, 1.0};
};

/// Cuts the object out, scales it about its centre by f ~ U[min, max],
/// applies a per-channel colour gain and blends it back with a random edge
/// mode (gaussian or linear). Parts leaving the image are clipped.
EnlargeResult enlarge_reblend(const AnnotatedImage& image, const ObjectAnnotation& object, Rng& rng,
                              const EnlargeOptions& opts = {});

/// Same, but the object is cut from `source` and painted onto `canvas` (both
/// of the mask's size), so several instances can be processed in turn.
EnlargeResult enlarge_reblend(const RgbImage& canvas, const RgbImage& source, const ObjectAnnotation& object,
                              Rng& rng, const EnlargeOptions& opts = {});

}  // namespace ctxaug
