#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "copypaste/copy_paste.hpp"
#include "copypaste/dataset.hpp"
#include "copypaste/transforms.hpp"

namespace copypaste {

struct DatasetSource {
  std::filesystem::path annotations;  // COCO JSON
  std::filesystem::path images;       // directory file names resolve against
  friend bool operator==(const DatasetSource&, const DatasetSource&) = default;
};

enum class PasteTargets { kSupervisedOnly, kPseudoOnly, kBoth };
enum class PasteSources { kSupervisedOnly };
enum class OnError { kAbort, kSkip };

/// Where target and source images come from.
struct DataMixSpec {
  DatasetSource supervised;
  std::optional<DatasetSource> pseudo;
  /// Probability that a target is drawn from the supervised pool when
  /// paste_targets is kBoth.
  double batch_fraction_supervised = 0.5;
  PasteTargets paste_targets = PasteTargets::kSupervisedOnly;
  PasteSources paste_sources = PasteSources::kSupervisedOnly;
  /// Pseudo annotations scoring below this are dropped at load.
  double pseudo_score_threshold = 0.5;

  friend bool operator==(const DataMixSpec&, const DataMixSpec&) = default;
};

struct AugConfig {
  Size2 target_size{1024, 1024};
  JitterMode main_jitter = JitterMode::lsj();
  JitterMode pasted_jitter = JitterMode::lsj();
  PastePolicy paste_policy = PastePolicy::random_subset();
  BlendConfig blend;
  bool copy_paste_enabled = true;
  bool mixup_enabled = false;
  double mixup_lambda = 0.5;
  std::uint64_t seed = 0;
  std::int64_t min_visible_pixels = 0;
  int workers = 1;
  std::optional<double> rfs;  // threshold t; RFS is off when absent
  DataMixSpec mix;
  Rgb pad_value{128, 128, 128};
  bool random_placement = false;
  /// Maximum random shift of the pasted layer as a fraction of the canvas
  /// side. 0 keeps pasted objects where jittering put them.
  double paste_translation = 0.0;
  /// Samples to produce; defaults to the size of the target pool(s).
  std::optional<std::int64_t> num_samples;
  OnError on_error = OnError::kAbort;

  friend bool operator==(const AugConfig&, const AugConfig&) = default;
};

/// Throws ConfigError whose message starts with the offending field name.
/// Relative dataset paths resolve against `base_dir`.
AugConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json config_to_json(const AugConfig& c);
AugConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError on inconsistent settings.
void validate_config(const AugConfig& c);

/// COPYPASTE_SEED and COPYPASTE_WORKERS take precedence over the file.
void apply_env_overrides(AugConfig& c);

}  // namespace copypaste
