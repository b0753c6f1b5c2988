#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "copypaste/config.hpp"
#include "copypaste/copy_paste.hpp"
#include "copypaste/dataset.hpp"

namespace copypaste {

enum class Pool { kSupervised, kPseudo };
const char* pool_name(Pool p);

/// Keeps pseudo annotations scoring at least `threshold`. Annotations with
/// no score are kept.
Dataset filter_pseudo(const Dataset& pseudo, double threshold);

/// Target-image sampling over supervised and pseudo-labeled datasets. Holds
/// shared references; no pixel data is copied.
class MixedView {
 public:
  MixedView(std::shared_ptr<const Dataset> supervised, std::shared_ptr<const Dataset> pseudo, DataMixSpec spec);

  const Dataset& dataset(Pool p) const { return p == Pool::kSupervised ? *supervised_ : *pseudo_; }
  const Dataset& supervised() const { return *supervised_; }
  bool has_pseudo() const { return pseudo_ != nullptr; }
  const DataMixSpec& spec() const { return spec_; }
  std::size_t pool_size(Pool p) const;

  /// Which pool the next target comes from.
  Pool draw_pool(Rng& rng) const;

 private:
  std::shared_ptr<const Dataset> supervised_;
  std::shared_ptr<const Dataset> pseudo_;
  DataMixSpec spec_;
};

/// Throws ConfigError when the two category tables disagree.
MixedView merge_pseudo(std::shared_ptr<const Dataset> supervised, std::shared_ptr<const Dataset> pseudo,
                       const DataMixSpec& spec);

struct PlanItem {
  std::int64_t index = 0;
  Pool target_pool = Pool::kSupervised;
  std::size_t target_position = 0;                 // into the pool's images()
  std::optional<std::size_t> source_position;      // into supervised images()
};

/// Item k depends only on (seed, k) and the pool-draw prefix before it.
/// Within a pool, targets cycle through per-epoch shuffles (repeat-factor
/// epochs for the supervised pool when RFS is on).
std::vector<PlanItem> make_plan(const AugConfig& config, const MixedView& view, std::int64_t num_samples);

struct OutputSample {
  std::int64_t index = 0;
  Image image;
  /// Targets first, then pasted instances; masks are Bitmaps.
  std::vector<InstanceAnnotation> annotations;
  std::size_t target_count = 0;          // leading annotations from the target image
  std::vector<bool> pasted;              // parallel to annotations
  std::vector<double> pre_occlusion_area;  // parallel; 0 when not applicable
  std::vector<double> mixup_weight;      // parallel; empty unless mixup
  Pool target_pool = Pool::kSupervised;
  std::int64_t target_image_id = 0;
  std::string target_file_name;
  std::optional<std::int64_t> source_image_id;
  std::vector<std::int64_t> pasted_annotation_ids;
  std::size_t occlusion_candidates = 0;
  TransformParams target_params;
  std::optional<TransformParams> source_params;

  /// `<target stem>_aug<index>.png`
  std::string output_file_name() const;
};

/// Owns the datasets and the plan; generate() is a pure function of the
/// item index and safe to call concurrently.
class Engine {
 public:
  /// Loads datasets named in the config.
  explicit Engine(AugConfig config);
  Engine(AugConfig config, std::shared_ptr<const Dataset> supervised, std::shared_ptr<const Dataset> pseudo);

  const AugConfig& config() const { return config_; }
  const MixedView& view() const { return view_; }
  const std::vector<PlanItem>& plan() const { return plan_; }
  std::int64_t size() const { return static_cast<std::int64_t>(plan_.size()); }

  OutputSample generate(std::int64_t index) const;

 private:
  AugConfig config_;
  MixedView view_;
  std::vector<PlanItem> plan_;
};

/// Number of engine worker threads currently alive, process-wide.
int live_worker_count();

/// Ordered stream of samples computed by a pool of workers. Single
/// consumer: concurrent next() calls are rejected.
class SampleStream {
 public:
  SampleStream(std::shared_ptr<const Engine> engine, int workers);
  ~SampleStream();
  SampleStream(const SampleStream&) = delete;
  SampleStream& operator=(const SampleStream&) = delete;

  /// Next sample in plan order, or nullopt when exhausted. Rethrows a worker
  /// failure as Error naming the item. Throws Error after close().
  std::optional<OutputSample> next();
  /// Stops and joins workers. Idempotent.
  void close();
  bool closed() const { return closed_; }

 private:
  struct Slot {
    std::optional<OutputSample> sample;
    std::exception_ptr error;
  };
  void worker_loop();

  std::shared_ptr<const Engine> engine_;
  std::size_t window_;
  std::mutex mu_;
  std::condition_variable produced_;
  std::condition_variable consumed_;
  std::map<std::int64_t, Slot> ready_;
  std::int64_t next_to_claim_ = 0;
  std::int64_t next_to_emit_ = 0;
  bool stopping_ = false;
  bool closed_ = false;
  std::atomic<bool> in_next_{false};
  std::vector<std::thread> threads_;
};

struct RunStats {
  std::int64_t samples_emitted = 0;
  std::int64_t samples_skipped = 0;
  std::int64_t instances_pasted = 0;
  std::int64_t occlusion_candidates = 0;
  std::int64_t instances_removed = 0;
  /// Mean over occlusion candidates of visible / pre-paste area, removed
  /// instances counting as 0.
  double mean_visible_area_ratio = 1.0;
  double elapsed_seconds = 0.0;
  double samples_per_second = 0.0;
};

Json run_stats_to_json(const RunStats& s);

/// Consumes a stream in plan order, honoring config.on_error.
RunStats stream_samples(std::shared_ptr<const Engine> engine, const std::function<void(OutputSample&&)>& consumer);

/// Writes `<stem>_aug<k>.png` files and `annotations.json` into out_dir.
RunStats run(std::shared_ptr<const Engine> engine, const std::filesystem::path& out_dir);
RunStats run(const AugConfig& config, const std::filesystem::path& out_dir);

/// Output-JSON form of a set of samples (images, annotations, categories).
class OutputWriter {
 public:
  OutputWriter(const Engine& engine);
  void add(const OutputSample& s);
  Dataset finish() const;

 private:
  const Engine& engine_;
  std::vector<ImageRecord> images_;
  std::vector<InstanceAnnotation> annotations_;
  std::int64_t next_annotation_id_ = 1;
};

}  // namespace copypaste
