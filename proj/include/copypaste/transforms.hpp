#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "copypaste/dataset.hpp"
#include "copypaste/image.hpp"
#include "copypaste/rng.hpp"

namespace copypaste {

struct Size2 {
  int height = 0;
  int width = 0;
  friend bool operator==(const Size2&, const Size2&) = default;
};

/// Scale jitter: SSJ draws from [0.8, 1.25], LSJ from [0.1, 2.0], Fixed
/// always returns one factor, Range is a user-supplied closed interval.
struct JitterMode {
  enum class Kind { kSsj, kLsj, kFixed, kRange };

  Kind kind = Kind::kFixed;
  double lo = 1.0;
  double hi = 1.0;

  static JitterMode ssj() { return {Kind::kSsj, 0.8, 1.25}; }
  static JitterMode lsj() { return {Kind::kLsj, 0.1, 2.0}; }
  static JitterMode fixed(double scale) { return {Kind::kFixed, scale, scale}; }
  static JitterMode range(double lo, double hi) { return {Kind::kRange, lo, hi}; }

  /// Empty string when valid, otherwise the reason.
  std::string validate() const;
  friend bool operator==(const JitterMode&, const JitterMode&) = default;
};

/// Everything needed to replay one scale -> flip -> crop/pad transform.
struct TransformParams {
  double scale = 1.0;
  bool flip = false;
  Size2 source;     // input image size
  Size2 scaled;     // size after resizing, before crop/pad
  Size2 target;     // output canvas
  int crop_x = 0;   // offset into the scaled image when it exceeds the target
  int crop_y = 0;
  int place_x = 0;  // offset of the scaled image on the canvas when smaller
  int place_y = 0;
  Rgb pad_value{128, 128, 128};

  friend bool operator==(const TransformParams&, const TransformParams&) = default;
};

struct SampleOptions {
  Rgb pad_value{128, 128, 128};
  /// Place a smaller scaled image at a random canvas offset instead of the
  /// top-left corner.
  bool random_placement = false;
};

/// Size of `source` resized by `scale`, each side at least one pixel.
Size2 scaled_size(Size2 source, double scale);

TransformParams sample_params(const JitterMode& mode, Size2 target, Size2 source, Rng& rng,
                              const SampleOptions& options = {});

/// The transform that maps a `size` image onto itself unchanged.
TransformParams identity_params(Size2 size);

struct TransformedSample {
  Image image;
  /// Every segmentation is a Bitmap of the target size; bbox and area are
  /// tight to it.
  std::vector<InstanceAnnotation> annotations;
  TransformParams params;
  std::int64_t source_image_id = 0;
};

/// Resizes (bilinear pixels, nearest masks), flips, then crops or pads to
/// the target. Instances left with min_visible_pixels or fewer pixels (and
/// never fewer than one) are dropped.
TransformedSample apply_transform(const Image& image, std::span<const InstanceAnnotation> annotations,
                                  const TransformParams& params, std::int64_t image_id = 0,
                                  std::int64_t min_visible_pixels = 0);

/// Nearest-neighbour resampling of a single mask under `params`.
Bitmap transform_mask(const Bitmap& mask, const TransformParams& params);

/// Integer shift of pixels and masks; uncovered pixels take `fill` and
/// instances shifted fully out of frame are dropped.
TransformedSample translate(const TransformedSample& sample, int dx, int dy, Rgb fill);

}  // namespace copypaste
