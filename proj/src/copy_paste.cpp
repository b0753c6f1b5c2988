#include "copypaste/copy_paste.hpp"

#include <algorithm>
#include <cmath>

#include "copypaste/error.hpp"

namespace copypaste {

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0)); }

std::vector<std::size_t> select_subset(const TransformedSample& src, const PastePolicy& policy, Rng& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < src.annotations.size(); ++i) {
    if (!src.annotations[i].iscrowd) eligible.push_back(i);
  }
  switch (policy.kind) {
    case PastePolicy::Kind::kAllObjects:
      return eligible;
    case PastePolicy::Kind::kOneObject:
      if (eligible.empty()) return {};
      return {eligible[rng.below(eligible.size())]};
    case PastePolicy::Kind::kRandomSubset: {
      std::vector<std::size_t> kept;
      for (auto i : eligible) {
        if (rng.bernoulli(policy.keep_probability)) kept.push_back(i);
      }
      return kept;
    }
  }
  return {};
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    total += k[i + radius];
  }
  for (auto& v : k) v /= total;
  return k;
}

Bitmap union_mask(std::span<const Bitmap* const> masks, int height, int width) {
  Bitmap out(height, width);
  for (const Bitmap* m : masks) {
    if (m->height() != height || m->width() != width) throw ShapeError("paste mask does not match the canvas");
    auto& dst = out.data();
    const auto& src = m->data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
  }
  return out;
}

AlphaMap build_alpha(std::span<const Bitmap* const> masks, int height, int width, const BlendConfig& blend) {
  const Bitmap binary = union_mask(masks, height, width);
  AlphaMap alpha{height, width, std::vector<double>(binary.data().begin(), binary.data().end())};
  if (!blend.enabled) return alpha;
  if (!(blend.sigma > 0.0) || blend.kernel_radius < 0) throw ConfigError("blend sigma must be > 0");
  const auto k = gaussian_kernel(blend.sigma, blend.kernel_radius);
  const int r = blend.kernel_radius;
  // Separable pass; pixels outside the frame count as 0.
  std::vector<double> tmp(alpha.values.size(), 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) {
        const int xx = x + i;
        if (xx >= 0 && xx < width) s += k[i + r] * alpha.values[static_cast<std::size_t>(y) * width + xx];
      }
      tmp[static_cast<std::size_t>(y) * width + x] = s;
    }
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) {
        const int yy = y + i;
        if (yy >= 0 && yy < height) s += k[i + r] * tmp[static_cast<std::size_t>(yy) * width + x];
      }
      alpha.values[static_cast<std::size_t>(y) * width + x] = std::clamp(s, 0.0, 1.0);
    }
  }
  return alpha;
}

std::vector<InstanceAnnotation> update_annotations(std::span<const InstanceAnnotation> targets,
                                                   const Bitmap& alpha, std::int64_t min_visible_pixels) {
  const std::int64_t keep_above = std::max<std::int64_t>(0, min_visible_pixels);
  std::vector<InstanceAnnotation> out;
  out.reserve(targets.size());
  for (const auto& ann : targets) {
    if (ann.iscrowd) {
      out.push_back(ann);
      continue;
    }
    const auto* mask = std::get_if<Bitmap>(&ann.segmentation);
    if (!mask) throw ShapeError("occlusion update needs bitmap masks");
    if (!mask->same_shape(alpha)) throw ShapeError("instance mask does not match the paste alpha");
    Bitmap visible = *mask;
    auto& v = visible.data();
    const auto& a = alpha.data();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = v[i] & static_cast<std::uint8_t>(!a[i]);
    InstanceAnnotation updated = ann;
    updated.segmentation = std::move(visible);
    normalize_geometry(updated);
    if (static_cast<std::int64_t>(updated.area) <= keep_above) continue;
    out.push_back(std::move(updated));
  }
  return out;
}

ComposedSample paste(const TransformedSample& target, const TransformedSample& src,
                     std::span<const std::size_t> subset, const BlendConfig& blend,
                     std::int64_t min_visible_pixels) {
  if (!target.image.same_shape(src.image)) throw ShapeError("paste source and target differ in size");
  const int h = target.image.height(), w = target.image.width();
  std::vector<const Bitmap*> masks;
  masks.reserve(subset.size());
  for (auto i : subset) {
    if (i >= src.annotations.size()) throw ShapeError("paste subset index out of range");
    masks.push_back(&std::get<Bitmap>(src.annotations[i].segmentation));
  }

  ComposedSample out;
  out.binary_alpha = union_mask(masks, h, w);
  out.alpha = build_alpha(masks, h, w, blend);
  out.image = target.image;
  auto& dst = out.image.data();
  const auto& fg = src.image.data();
  for (std::size_t p = 0; p < out.alpha.values.size(); ++p) {
    const double a = out.alpha.values[p];
    if (a == 0.0) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t i = p * 3 + c;
      dst[i] = a == 1.0 ? fg[i] : to_byte(fg[i] * a + dst[i] * (1.0 - a));
    }
  }

  for (const auto& ann : target.annotations) {
    if (!ann.iscrowd) ++out.occlusion_candidates;
  }
  out.annotations = update_annotations(target.annotations, out.binary_alpha, min_visible_pixels);
  out.pre_occlusion_area.assign(out.annotations.size(), 0.0);
  {
    std::size_t j = 0;
    for (std::size_t i = 0; i < out.annotations.size(); ++i) {
      while (target.annotations[j].id != out.annotations[i].id) ++j;
      out.pre_occlusion_area[i] = target.annotations[j].area;
      ++j;
    }
  }
  out.provenance.target_image_id = target.source_image_id;
  out.provenance.source_image_id = src.source_image_id;
  for (auto i : subset) {
    out.annotations.push_back(src.annotations[i]);
    out.provenance.pasted_annotation_ids.push_back(src.annotations[i].id);
  }
  out.pasted_count = subset.size();
  return out;
}

MixupSample mixup(const TransformedSample& a, const TransformedSample& b, double lambda) {
  if (!a.image.same_shape(b.image)) throw ShapeError("mixup inputs differ in size");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("mixup lambda must lie in [0, 1]");
  MixupSample out;
  out.image = a.image;
  auto& dst = out.image.data();
  const auto& other = b.image.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = to_byte(lambda * dst[i] + (1.0 - lambda) * other[i]);
  for (const auto& ann : a.annotations) {
    out.annotations.push_back(ann);
    out.weights.push_back(lambda);
  }
  for (const auto& ann : b.annotations) {
    out.annotations.push_back(ann);
    out.weights.push_back(1.0 - lambda);
  }
  return out;
}

}  // namespace copypaste
