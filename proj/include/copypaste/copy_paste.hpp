#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "copypaste/transforms.hpp"

namespace copypaste {

/// Which source instances are pasted.
struct PastePolicy {
  enum class Kind { kRandomSubset, kOneObject, kAllObjects };

  Kind kind = Kind::kRandomSubset;
  double keep_probability = 0.5;  // RandomSubset only

  static PastePolicy random_subset(double p = 0.5) { return {Kind::kRandomSubset, p}; }
  static PastePolicy one_object() { return {Kind::kOneObject, 0.5}; }
  static PastePolicy all_objects() { return {Kind::kAllObjects, 0.5}; }

  friend bool operator==(const PastePolicy&, const PastePolicy&) = default;
};

/// Optional Gaussian smoothing of the paste alpha.
struct BlendConfig {
  bool enabled = false;
  double sigma = 1.0;
  int kernel_radius = 2;

  friend bool operator==(const BlendConfig&, const BlendConfig&) = default;
};

/// H x W opacity of the pasted layer, values in [0, 1].
struct AlphaMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;  // row-major

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct Provenance {
  std::int64_t target_image_id = 0;
  std::int64_t source_image_id = 0;
  std::vector<std::int64_t> pasted_annotation_ids;  // ids in the source image
};

struct ComposedSample {
  Image image;
  /// Surviving target instances first, then pasted instances (top layer).
  std::vector<InstanceAnnotation> annotations;
  std::size_t pasted_count = 0;  // length of the pasted tail
  AlphaMap alpha;
  Bitmap binary_alpha;
  Provenance provenance;
  /// Non-crowd target instances considered for the occlusion update.
  std::size_t occlusion_candidates = 0;
  /// Pre-occlusion area of every surviving non-crowd target instance, keyed
  /// by position in `annotations`.
  std::vector<double> pre_occlusion_area;
};

/// Indices into src.annotations. Crowd regions are never selected.
std::vector<std::size_t> select_subset(const TransformedSample& src, const PastePolicy& policy, Rng& rng);

/// Union of the masks, optionally Gaussian-smoothed (zero outside the
/// frame) and clamped to [0, 1].
AlphaMap build_alpha(std::span<const Bitmap* const> masks, int height, int width, const BlendConfig& blend);
Bitmap union_mask(std::span<const Bitmap* const> masks, int height, int width);

/// Normalized 1-D Gaussian taps, length 2 * radius + 1.
std::vector<double> gaussian_kernel(double sigma, int radius);

/// Occlusion update: masks lose the pixels under `alpha`, boxes and areas
/// are recomputed and instances with min_visible_pixels or fewer visible
/// pixels (never fewer than one) are dropped. Crowd regions pass through.
std::vector<InstanceAnnotation> update_annotations(std::span<const InstanceAnnotation> targets,
                                                   const Bitmap& alpha, std::int64_t min_visible_pixels = 0);

/// Pastes src.annotations[subset] onto `target`:
/// out = src * alpha + target * (1 - alpha), rounded half away from zero.
ComposedSample paste(const TransformedSample& target, const TransformedSample& src,
                     std::span<const std::size_t> subset, const BlendConfig& blend,
                     std::int64_t min_visible_pixels = 0);

struct MixupSample {
  Image image;
  std::vector<InstanceAnnotation> annotations;  // a's, then b's
  std::vector<double> weights;                  // lambda for a's, 1 - lambda for b's
};

/// Pixel-wise lambda * a + (1 - lambda) * b.
MixupSample mixup(const TransformedSample& a, const TransformedSample& b, double lambda);

/// Rounds half away from zero and clamps to [0, 255].
std::uint8_t to_byte(double v);

}  // namespace copypaste
