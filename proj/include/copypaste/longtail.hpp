#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <vector>

#include "copypaste/dataset.hpp"
#include "copypaste/rng.hpp"

namespace copypaste {

inline constexpr double kDefaultRfsThreshold = 0.001;
inline constexpr double kDefaultClassBalancedBeta = 0.999;
inline constexpr double kClassWeightMin = 0.01;
inline constexpr double kClassWeightMax = 5.0;

struct CategoryFrequency {
  std::map<std::int64_t, double> fraction;       // f(c) in (0, 1]
  std::map<std::int64_t, std::int64_t> images;   // images containing c
  std::int64_t total_images = 0;
};

/// Fraction of images holding at least one instance of each category.
/// Categories with no instances are absent. Throws FormatError when the
/// dataset has no images.
CategoryFrequency category_frequency(const Dataset& d, bool include_crowd = false);

/// max(1, sqrt(t / f)). Throws ConfigError unless 0 < f <= 1 and t > 0.
double repeat_factor(double frequency, double threshold);

/// Image-level factor: the largest category factor in the image, 1 when the
/// image has no counted instances. Parallel to d.images().
std::vector<double> image_repeat_factors(const Dataset& d, double threshold, bool include_crowd = false);

/// One epoch of repeat-factor sampling: image i appears floor(r_i) times
/// plus once more with probability frac(r_i), in shuffled order.
std::vector<std::int64_t> rfs_epoch(const Dataset& d, double threshold, Rng& rng, bool include_crowd = false);
/// Same over precomputed factors; returns positions into `factors`.
std::vector<std::size_t> rfs_epoch_positions(const std::vector<double>& factors, Rng& rng);

/// Per-category non-crowd instance counts (training split).
std::map<std::int64_t, std::int64_t> instance_counts(const Dataset& d, bool include_crowd = false);

struct ClassWeightRow {
  std::int64_t category_id = 0;
  std::int64_t instances = 0;
  double raw = 0.0;
  double normalized = 0.0;
  double clipped = 0.0;
};

struct ClassWeights {
  double beta = kDefaultClassBalancedBeta;
  std::vector<ClassWeightRow> rows;  // ascending category id
};

/// raw = (1 - beta) / (1 - beta^n), divided by the mean raw weight and
/// clipped to [0.01, 5]. Throws ConfigError for n < 1 or beta outside (0, 1).
ClassWeights class_balanced_weights(const std::map<std::int64_t, std::int64_t>& counts, double beta);
double class_balanced_raw(std::int64_t n, double beta);

void write_rfs_csv(std::ostream& out, const Dataset& d, double threshold, bool include_crowd = false);
void write_class_weights_csv(std::ostream& out, const Dataset& d, const ClassWeights& w);
Json class_weights_to_json(const ClassWeights& w);

}  // namespace copypaste
