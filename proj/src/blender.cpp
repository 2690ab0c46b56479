#include "ctxaug/blender.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ctxaug/error.hpp"
#include "ctxaug/image_ops.hpp"

namespace ctxaug {

std::string to_string(BlendMode m) {
  switch (m) {
    case BlendMode::none: return "none";
    case BlendMode::gaussian_edge: return "gaussian_edge";
    case BlendMode::linear_edge: return "linear_edge";
    case BlendMode::motion_blur: return "motion_blur";
  }
  return "none";
}

BlendMode parse_blend_mode(const std::string& s) {
  for (auto m : kBlendModes)
    if (to_string(m) == s) return m;
  throw ConfigError("unknown blend mode '" + s + "'");
}

int support_radius(BlendMode mode, const BlendParams& params) {
  switch (mode) {
    case BlendMode::gaussian_edge: return static_cast<int>(std::ceil(3.0 * params.gaussian_sigma));
    case BlendMode::motion_blur: return -1;
    default: return 0;
  }
}

namespace {

struct Layer {
  RgbImage pixels;
  Mask hard;
};

Layer scale_layer(const RgbImage& pixels, const Mask& mask, double scale) {
  const int w = std::max(1, static_cast<int>(std::lround(scale * mask.width())));
  const int h = std::max(1, static_cast<int>(std::lround(scale * mask.height())));
  Layer l{resize_bilinear(pixels, w, h), Mask(w, h)};
  const AlphaMap a = resize_bilinear(to_alpha(mask), w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) l.hard.at(x, y) = a.at(x, y) > 0.5f;
  return l;
}

/// Composites `layer` with its top-left corner at (x0, y0); pixels outside the
/// image are dropped.
BlendResult composite(const RgbImage& image, const Layer& layer, int x0, int y0, BlendMode mode, Rng& rng,
                      const BlendParams& params) {
  const int lw = layer.hard.width(), lh = layer.hard.height();
  const int margin = std::max(0, support_radius(mode, params));

  // Canvas: the layer rectangle grown by the mode's support.
  const int cx0 = x0 - margin, cy0 = y0 - margin;
  const int cw = lw + 2 * margin, ch = lh + 2 * margin;
  Mask hard(cw, ch);
  for (int y = 0; y < lh; ++y)
    for (int x = 0; x < lw; ++x) hard.at(x + margin, y + margin) = layer.hard.at(x, y);

  AlphaMap alpha;
  switch (mode) {
    case BlendMode::gaussian_edge:
      alpha = gaussian_blur(to_alpha(hard), params.gaussian_sigma);
      break;
    case BlendMode::linear_edge: {
      alpha = distance_to_background(hard);
      for (auto& v : alpha.data()) v = std::min(1.0f, static_cast<float>(v / params.ramp_width));
      break;
    }
    default:
      alpha = to_alpha(hard);
  }

  BlendResult r;
  r.image = image;
  r.pasted_mask = Mask(image.width(), image.height());
  r.paste_rect = {x0, y0, x0 + lw, y0 + lh};
  for (int y = 0; y < ch; ++y) {
    const int iy = cy0 + y;
    if (iy < 0 || iy >= image.height()) continue;
    const int ly = std::clamp(y - margin, 0, lh - 1);
    for (int x = 0; x < cw; ++x) {
      const int ix = cx0 + x;
      if (ix < 0 || ix >= image.width()) continue;
      const float a = alpha.at(x, y);
      if (a <= 0.0f) continue;
      if (a > 0.5f) r.pasted_mask.at(ix, iy) = 1;
      const int lx = std::clamp(x - margin, 0, lw - 1);
      for (int c = 0; c < 3; ++c) {
        const double fg = layer.pixels.at(lx, ly, c);
        if (a >= 1.0f) {
          r.image.at(ix, iy, c) = static_cast<std::uint8_t>(fg);
        } else {
          const double bg = image.at(ix, iy, c);
          r.image.at(ix, iy, c) = detail::store<std::uint8_t>(bg + (fg - bg) * a);
        }
      }
    }
  }
  if (mode == BlendMode::motion_blur) {
    r.motion_angle = rng.uniform(0.0, std::numbers::pi);
    r.image = motion_blur(r.image, params.motion_length, r.motion_angle);
  }
  return r;
}

}  // namespace

BlendResult blend(const RgbImage& image, const BlendSpec& spec, Rng& rng, const BlendParams& params) {
  if (!spec.cutout) throw PreconditionError("blend without a cutout");
  if (!spec.target_box.inside(image.width(), image.height(), 0.5))
    throw PreconditionError("blend target outside the image");
  const Layer layer = scale_layer(spec.cutout->pixels, spec.cutout->mask, spec.scale);
  const int lw = layer.hard.width(), lh = layer.hard.height();
  if (lw > image.width() || lh > image.height()) throw PreconditionError("scaled cutout larger than the image");
  const Point c = spec.target_box.center();
  // Rounding may push the layer one pixel past the border; pull it back.
  const int x0 = std::clamp(static_cast<int>(std::lround(c.x - lw / 2.0)), 0, image.width() - lw);
  const int y0 = std::clamp(static_cast<int>(std::lround(c.y - lh / 2.0)), 0, image.height() - lh);
  return composite(image, layer, x0, y0, spec.mode, rng, params);
}

EnlargeResult enlarge_reblend(const AnnotatedImage& image, const ObjectAnnotation& object, Rng& rng,
                              const EnlargeOptions& opts) {
  return enlarge_reblend(image.pixels, image.pixels, object, rng, opts);
}

EnlargeResult enlarge_reblend(const RgbImage& canvas, const RgbImage& source, const ObjectAnnotation& object,
                              Rng& rng, const EnlargeOptions& opts) {
  if (!object.mask) throw PreconditionError("enlarge_reblend needs an instance mask");
  if (object.mask->width() != canvas.width() || object.mask->height() != canvas.height() ||
      source.width() != canvas.width() || source.height() != canvas.height())
    throw PreconditionError("enlarge_reblend rasters differ in size");
  const auto rect = tight_rect(*object.mask);
  if (!rect) throw PreconditionError("enlarge_reblend on an empty mask");

  EnlargeResult out;
  out.factor = opts.factor ? *opts.factor : rng.uniform(opts.min_factor, opts.max_factor);
  for (auto& g : out.colour) g = rng.uniform(1.0 - opts.colour_jitter, 1.0 + opts.colour_jitter);
  if (opts.colour) out.colour = *opts.colour;
  constexpr std::array<BlendMode, 2> edge_modes = {BlendMode::gaussian_edge, BlendMode::linear_edge};
  out.mode = edge_modes[rng.below(edge_modes.size())];
  if (opts.mode) out.mode = *opts.mode;

  RgbImage pixels = crop(source, *rect);
  for (int y = 0; y < pixels.height(); ++y)
    for (int x = 0; x < pixels.width(); ++x)
      for (int c = 0; c < 3; ++c)
        pixels.at(x, y, c) = detail::store<std::uint8_t>(pixels.at(x, y, c) * out.colour[static_cast<std::size_t>(c)]);
  const Layer layer = scale_layer(pixels, crop(*object.mask, *rect), out.factor);

  const double cx = (rect->x0 + rect->x1) / 2.0, cy = (rect->y0 + rect->y1) / 2.0;
  const int x0 = static_cast<int>(std::lround(cx - layer.hard.width() / 2.0));
  const int y0 = static_cast<int>(std::lround(cy - layer.hard.height() / 2.0));
  BlendResult r = composite(canvas, layer, x0, y0, out.mode, rng, opts.params);
  out.image = std::move(r.image);
  out.pasted_mask = std::move(r.pasted_mask);
  return out;
}

}  // namespace ctxaug
