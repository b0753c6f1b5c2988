#include "copypaste/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "copypaste/error.hpp"

namespace copypaste {

std::string JitterMode::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return "scale bounds must be finite";
  if (lo <= 0.0) return "scale lower bound must be > 0";
  if (hi < lo) return "scale range is empty (max < min)";
  return {};
}

Size2 scaled_size(Size2 source, double scale) {
  const auto side = [scale](int n) { return std::max(1, static_cast<int>(std::lround(n * scale))); };
  return {side(source.height), side(source.width)};
}

TransformParams sample_params(const JitterMode& mode, Size2 target, Size2 source, Rng& rng,
                              const SampleOptions& options) {
  if (target.height < 1 || target.width < 1 || source.height < 1 || source.width < 1) {
    throw ShapeError("transform sizes must be positive");
  }
  TransformParams p;
  p.source = source;
  p.target = target;
  p.pad_value = options.pad_value;
  p.scale = mode.lo == mode.hi ? mode.lo : rng.uniform_closed(mode.lo, mode.hi);
  p.flip = rng.bernoulli(0.5);
  p.scaled = scaled_size(source, p.scale);
  if (p.scaled.height > target.height) p.crop_y = static_cast<int>(rng.below(p.scaled.height - target.height + 1));
  if (p.scaled.width > target.width) p.crop_x = static_cast<int>(rng.below(p.scaled.width - target.width + 1));
  if (options.random_placement) {
    if (p.scaled.height < target.height) p.place_y = static_cast<int>(rng.below(target.height - p.scaled.height + 1));
    if (p.scaled.width < target.width) p.place_x = static_cast<int>(rng.below(target.width - p.scaled.width + 1));
  }
  return p;
}

TransformParams identity_params(Size2 size) {
  TransformParams p;
  p.source = size;
  p.scaled = size;
  p.target = size;
  return p;
}

namespace {

// Per output column (or row): where it samples from in the source image.
struct AxisMap {
  std::vector<int> nearest;  // -1 outside the placed image
  std::vector<int> lo;
  std::vector<int> hi;
  std::vector<double> frac;
};

AxisMap build_axis(int out_len, int src_len, int scaled_len, int crop, int place, bool flip) {
  AxisMap m;
  m.nearest.assign(out_len, -1);
  m.lo.assign(out_len, 0);
  m.hi.assign(out_len, 0);
  m.frac.assign(out_len, 0.0);
  const double ratio = static_cast<double>(src_len) / scaled_len;
  for (int o = 0; o < out_len; ++o) {
    const int s = o - place + crop;
    if (s < 0 || s >= scaled_len) continue;
    const int f = flip ? scaled_len - 1 - s : s;
    // floor((f + 0.5) * src / scaled) in exact integer arithmetic.
    const long long num = (2LL * f + 1) * src_len;
    m.nearest[o] = static_cast<int>(std::min<long long>(num / (2LL * scaled_len), src_len - 1));
    double u = (f + 0.5) * ratio - 0.5;
    u = std::clamp(u, 0.0, static_cast<double>(src_len - 1));
    const int u0 = static_cast<int>(std::floor(u));
    m.lo[o] = u0;
    m.hi[o] = std::min(u0 + 1, src_len - 1);
    m.frac[o] = u - u0;
  }
  return m;
}

std::uint8_t round_to_byte(double v) {
  const double r = std::round(v);  // half away from zero
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

struct Maps {
  AxisMap x;
  AxisMap y;
};

Maps build_maps(const TransformParams& p) {
  return {build_axis(p.target.width, p.source.width, p.scaled.width, p.crop_x, p.place_x, p.flip),
          build_axis(p.target.height, p.source.height, p.scaled.height, p.crop_y, p.place_y, false)};
}

Bitmap remap_mask(const Bitmap& mask, const Maps& maps, Size2 target) {
  Bitmap out(target.height, target.width);
  for (int oy = 0; oy < target.height; ++oy) {
    const int sy = maps.y.nearest[oy];
    if (sy < 0) continue;
    for (int ox = 0; ox < target.width; ++ox) {
      const int sx = maps.x.nearest[ox];
      if (sx >= 0 && mask.at(sx, sy)) out.set(ox, oy, true);
    }
  }
  return out;
}

}  // namespace

Bitmap transform_mask(const Bitmap& mask, const TransformParams& params) {
  if (mask.height() != params.source.height || mask.width() != params.source.width) {
    throw ShapeError("mask does not match transform source size");
  }
  return remap_mask(mask, build_maps(params), params.target);
}

TransformedSample apply_transform(const Image& image, std::span<const InstanceAnnotation> annotations,
                                  const TransformParams& params, std::int64_t image_id,
                                  std::int64_t min_visible_pixels) {
  if (image.height() != params.source.height || image.width() != params.source.width) {
    throw ShapeError("image " + std::to_string(image_id) + " is " + std::to_string(image.height()) + "x" +
                     std::to_string(image.width()) + " but transform expects " +
                     std::to_string(params.source.height) + "x" + std::to_string(params.source.width));
  }
  const Maps maps = build_maps(params);
  TransformedSample out;
  out.params = params;
  out.source_image_id = image_id;
  out.image = Image(params.target.height, params.target.width, params.pad_value);
  for (int oy = 0; oy < params.target.height; ++oy) {
    if (maps.y.nearest[oy] < 0) continue;
    const int y0 = maps.y.lo[oy], y1 = maps.y.hi[oy];
    const double fy = maps.y.frac[oy];
    for (int ox = 0; ox < params.target.width; ++ox) {
      if (maps.x.nearest[ox] < 0) continue;
      const int x0 = maps.x.lo[ox], x1 = maps.x.hi[ox];
      const double fx = maps.x.frac[ox];
      const std::uint8_t* p00 = image.pixel(x0, y0);
      const std::uint8_t* p01 = image.pixel(x1, y0);
      const std::uint8_t* p10 = image.pixel(x0, y1);
      const std::uint8_t* p11 = image.pixel(x1, y1);
      std::uint8_t* dst = out.image.pixel(ox, oy);
      for (int c = 0; c < 3; ++c) {
        const double top = p00[c] + (p01[c] - p00[c]) * fx;
        const double bottom = p10[c] + (p11[c] - p10[c]) * fx;
        dst[c] = round_to_byte(top + (bottom - top) * fy);
      }
    }
  }
  const std::int64_t keep_above = std::max<std::int64_t>(0, min_visible_pixels);
  for (const auto& ann : annotations) {
    Bitmap src = to_bitmap(ann.segmentation, image.height(), image.width());
    InstanceAnnotation t = ann;
    t.segmentation = remap_mask(src, maps, params.target);
    normalize_geometry(t);
    if (static_cast<std::int64_t>(t.area) <= keep_above) continue;
    out.annotations.push_back(std::move(t));
  }
  return out;
}

TransformedSample translate(const TransformedSample& sample, int dx, int dy, Rgb fill) {
  const int h = sample.image.height(), w = sample.image.width();
  TransformedSample out;
  out.params = sample.params;
  out.source_image_id = sample.source_image_id;
  out.image = Image(h, w, fill);
  for (int y = 0; y < h; ++y) {
    const int sy = y - dy;
    if (sy < 0 || sy >= h) continue;
    for (int x = 0; x < w; ++x) {
      const int sx = x - dx;
      if (sx < 0 || sx >= w) continue;
      std::copy_n(sample.image.pixel(sx, sy), 3, out.image.pixel(x, y));
    }
  }
  for (const auto& ann : sample.annotations) {
    const auto& src = std::get<Bitmap>(ann.segmentation);
    Bitmap moved(h, w);
    for (int y = std::max(0, dy); y < std::min(h, h + dy); ++y) {
      for (int x = std::max(0, dx); x < std::min(w, w + dx); ++x) {
        if (src.at(x - dx, y - dy)) moved.set(x, y, true);
      }
    }
    InstanceAnnotation t = ann;
    t.segmentation = std::move(moved);
    normalize_geometry(t);
    if (t.area > 0) out.annotations.push_back(std::move(t));
  }
  return out;
}

}  // namespace copypaste
