#include "copypaste/pipeline.hpp"

#include <chrono>
#include <iostream>
#include <numeric>

#include "copypaste/error.hpp"
#include "copypaste/longtail.hpp"

namespace copypaste {

namespace {

std::atomic<int> g_live_workers{0};

Json params_to_json(const TransformParams& p) {
  return {{"scale", p.scale},
          {"flip", p.flip},
          {"scaled_size", {p.scaled.height, p.scaled.width}},
          {"crop_offset", {p.crop_x, p.crop_y}},
          {"place_offset", {p.place_x, p.place_y}}};
}

std::shared_ptr<const Dataset> load_source(const DatasetSource& src, const char* field) {
  if (!std::filesystem::exists(src.annotations)) {
    throw ConfigError(std::string(field) + ".annotations: file not found: " + src.annotations.string());
  }
  return std::make_shared<const Dataset>(load_dataset(src.annotations, src.images));
}

}  // namespace

const char* pool_name(Pool p) { return p == Pool::kSupervised ? "supervised" : "pseudo"; }

Dataset filter_pseudo(const Dataset& pseudo, double threshold) {
  std::vector<InstanceAnnotation> kept;
  for (const auto& a : pseudo.annotations()) {
    if (!a.score || *a.score >= threshold) kept.push_back(a);
  }
  Dataset out(pseudo.images(), std::move(kept), pseudo.categories(), pseudo.extra());
  out.set_image_root(pseudo.image_root());
  return out;
}

MixedView::MixedView(std::shared_ptr<const Dataset> supervised, std::shared_ptr<const Dataset> pseudo,
                     DataMixSpec spec)
    : supervised_(std::move(supervised)), pseudo_(std::move(pseudo)), spec_(std::move(spec)) {
  if (!supervised_) throw ConfigError("mix.supervised: dataset is required");
  if (spec_.paste_targets != PasteTargets::kSupervisedOnly && !pseudo_) {
    throw ConfigError("mix.pseudo: dataset is required when paste_targets includes pseudo data");
  }
}

std::size_t MixedView::pool_size(Pool p) const {
  if (p == Pool::kPseudo) return pseudo_ ? pseudo_->images().size() : 0;
  return supervised_->images().size();
}

Pool MixedView::draw_pool(Rng& rng) const {
  switch (spec_.paste_targets) {
    case PasteTargets::kSupervisedOnly:
      return Pool::kSupervised;
    case PasteTargets::kPseudoOnly:
      return Pool::kPseudo;
    case PasteTargets::kBoth:
      return rng.bernoulli(spec_.batch_fraction_supervised) ? Pool::kSupervised : Pool::kPseudo;
  }
  return Pool::kSupervised;
}

MixedView merge_pseudo(std::shared_ptr<const Dataset> supervised, std::shared_ptr<const Dataset> pseudo,
                       const DataMixSpec& spec) {
  if (supervised && pseudo) {
    std::map<std::int64_t, std::string> a, b;
    for (const auto& c : supervised->categories()) a[c.id] = c.name;
    for (const auto& c : pseudo->categories()) b[c.id] = c.name;
    if (a != b) {
      for (const auto& [id, name] : b) {
        auto it = a.find(id);
        if (it == a.end()) throw ConfigError("mix.pseudo: category " + std::to_string(id) + " missing from supervised");
        if (it->second != name) {
          throw ConfigError("mix.pseudo: category " + std::to_string(id) + " is '" + name + "' but supervised has '" +
                            it->second + "'");
        }
      }
      throw ConfigError("mix.pseudo: category tables differ in size");
    }
  }
  return MixedView(std::move(supervised), std::move(pseudo), spec);
}

std::vector<PlanItem> make_plan(const AugConfig& config, const MixedView& view, std::int64_t num_samples) {
  struct PoolStream {
    std::vector<std::size_t> order;
    std::size_t cursor = 0;
    std::uint64_t epoch = 0;
  };
  PoolStream streams[2];
  std::vector<double> factors;
  if (config.rfs) factors = image_repeat_factors(view.supervised(), *config.rfs);

  auto next_position = [&](Pool pool) {
    auto& s = streams[pool == Pool::kSupervised ? 0 : 1];
    while (s.cursor >= s.order.size()) {
      Rng rng = Rng::keyed(config.seed, s.epoch++, pool == Pool::kSupervised ? "epoch/supervised" : "epoch/pseudo");
      std::vector<std::size_t> epoch;
      if (pool == Pool::kSupervised && config.rfs) {
        epoch = rfs_epoch_positions(factors, rng);
      } else {
        epoch.resize(view.pool_size(pool));
        std::iota(epoch.begin(), epoch.end(), std::size_t{0});
        rng.shuffle(epoch);
      }
      s.order.erase(s.order.begin(), s.order.begin() + static_cast<std::ptrdiff_t>(s.cursor));
      s.cursor = 0;
      s.order.insert(s.order.end(), epoch.begin(), epoch.end());
    }
    return s.order[s.cursor++];
  };

  const bool needs_source = config.copy_paste_enabled || config.mixup_enabled;
  const std::size_t sources = view.pool_size(Pool::kSupervised);
  std::vector<PlanItem> plan;
  plan.reserve(static_cast<std::size_t>(num_samples));
  for (std::int64_t k = 0; k < num_samples; ++k) {
    PlanItem item;
    item.index = k;
    Rng pool_rng = Rng::keyed(config.seed, static_cast<std::uint64_t>(k), "target_pool");
    item.target_pool = view.draw_pool(pool_rng);
    if (view.pool_size(item.target_pool) == 0) {
      throw ConfigError(std::string("mix: the ") + pool_name(item.target_pool) + " dataset has no images");
    }
    item.target_position = next_position(item.target_pool);
    if (needs_source) {
      if (sources == 0) throw ConfigError("mix.supervised: no images to paste from");
      Rng src_rng = Rng::keyed(config.seed, static_cast<std::uint64_t>(k), "source");
      item.source_position = static_cast<std::size_t>(src_rng.below(sources));
    }
    plan.push_back(item);
  }
  return plan;
}

std::string OutputSample::output_file_name() const {
  return std::filesystem::path(target_file_name).stem().string() + "_aug" + std::to_string(index) + ".png";
}

Engine::Engine(AugConfig config)
    : Engine(config, load_source(config.mix.supervised, "mix.supervised"),
             config.mix.pseudo ? std::make_shared<const Dataset>(filter_pseudo(
                                     *load_source(*config.mix.pseudo, "mix.pseudo"), config.mix.pseudo_score_threshold))
                               : nullptr) {}

Engine::Engine(AugConfig config, std::shared_ptr<const Dataset> supervised, std::shared_ptr<const Dataset> pseudo)
    : config_(std::move(config)), view_(merge_pseudo(std::move(supervised), std::move(pseudo), config_.mix)) {
  validate_config(config_);
  std::int64_t n = 0;
  if (config_.num_samples) {
    n = *config_.num_samples;
  } else {
    if (config_.mix.paste_targets != PasteTargets::kPseudoOnly) n += static_cast<std::int64_t>(view_.pool_size(Pool::kSupervised));
    if (config_.mix.paste_targets != PasteTargets::kSupervisedOnly) n += static_cast<std::int64_t>(view_.pool_size(Pool::kPseudo));
  }
  plan_ = make_plan(config_, view_, n);
}

namespace {

struct LoadedImage {
  const ImageRecord* record;
  Image pixels;
  std::vector<InstanceAnnotation> annotations;
};

LoadedImage load_entry(const Dataset& d, std::size_t position) {
  LoadedImage out{&d.images()[position], {}, {}};
  out.pixels = read_image(d.image_path(*out.record));
  if (out.pixels.height() != out.record->height || out.pixels.width() != out.record->width) {
    throw FormatError("image " + std::to_string(out.record->id) + " (" + out.record->file_name + ") is " +
                      std::to_string(out.pixels.height()) + "x" + std::to_string(out.pixels.width()) +
                      " but its record says " + std::to_string(out.record->height) + "x" +
                      std::to_string(out.record->width));
  }
  for (auto pos : d.annotations_of(out.record->id)) out.annotations.push_back(d.annotations()[pos]);
  return out;
}

}  // namespace

OutputSample Engine::generate(std::int64_t index) const {
  if (index < 0 || index >= size()) throw Error("plan index " + std::to_string(index) + " out of range");
  const PlanItem& item = plan_[static_cast<std::size_t>(index)];
  const auto k = static_cast<std::uint64_t>(index);
  const SampleOptions options{config_.pad_value, config_.random_placement};
  const Dataset& target_ds = view_.dataset(item.target_pool);
  const LoadedImage target = load_entry(target_ds, item.target_position);

  Rng main_rng = Rng::keyed(config_.seed, k, "main_jitter");
  const Size2 target_src{target.pixels.height(), target.pixels.width()};
  const auto target_params = sample_params(config_.main_jitter, config_.target_size, target_src, main_rng, options);
  TransformedSample main = apply_transform(target.pixels, target.annotations, target_params, target.record->id,
                                           config_.min_visible_pixels);

  OutputSample out;
  out.index = index;
  out.target_pool = item.target_pool;
  out.target_image_id = target.record->id;
  out.target_file_name = target.record->file_name;
  out.target_params = target_params;

  if (!item.source_position) {
    out.image = std::move(main.image);
    out.annotations = std::move(main.annotations);
    out.target_count = out.annotations.size();
    out.pasted.assign(out.annotations.size(), false);
    out.pre_occlusion_area.assign(out.annotations.size(), 0.0);
    return out;
  }

  const LoadedImage source = load_entry(view_.supervised(), *item.source_position);
  Rng src_rng = Rng::keyed(config_.seed, k, "pasted_jitter");
  const Size2 source_src{source.pixels.height(), source.pixels.width()};
  const auto source_params = sample_params(config_.pasted_jitter, config_.target_size, source_src, src_rng, options);
  TransformedSample pasted = apply_transform(source.pixels, source.annotations, source_params, source.record->id,
                                             config_.min_visible_pixels);
  out.source_image_id = source.record->id;
  out.source_params = source_params;

  if (config_.mixup_enabled) {
    MixupSample mixed = mixup(main, pasted, config_.mixup_lambda);
    out.target_count = main.annotations.size();
    out.image = std::move(mixed.image);
    out.annotations = std::move(mixed.annotations);
    out.mixup_weight = std::move(mixed.weights);
    out.pasted.assign(out.annotations.size(), false);
    out.pre_occlusion_area.assign(out.annotations.size(), 0.0);
    return out;
  }

  if (config_.paste_translation > 0.0) {
    Rng shift_rng = Rng::keyed(config_.seed, k, "translate");
    const auto max_dx = static_cast<std::int64_t>(config_.paste_translation * config_.target_size.width);
    const auto max_dy = static_cast<std::int64_t>(config_.paste_translation * config_.target_size.height);
    const int dx = static_cast<int>(static_cast<std::int64_t>(shift_rng.below(2 * max_dx + 1)) - max_dx);
    const int dy = static_cast<int>(static_cast<std::int64_t>(shift_rng.below(2 * max_dy + 1)) - max_dy);
    pasted = translate(pasted, dx, dy, config_.pad_value);
  }

  Rng subset_rng = Rng::keyed(config_.seed, k, "subset");
  const auto subset = select_subset(pasted, config_.paste_policy, subset_rng);
  ComposedSample composed = paste(main, pasted, subset, config_.blend, config_.min_visible_pixels);

  out.image = std::move(composed.image);
  const std::size_t survivors = composed.annotations.size() - composed.pasted_count;
  out.target_count = survivors;
  out.pasted.assign(composed.annotations.size(), false);
  out.pre_occlusion_area.assign(composed.annotations.size(), 0.0);
  for (std::size_t i = 0; i < composed.annotations.size(); ++i) {
    if (i >= survivors) out.pasted[i] = true;
    else if (!composed.annotations[i].iscrowd) out.pre_occlusion_area[i] = composed.pre_occlusion_area[i];
  }
  out.annotations = std::move(composed.annotations);
  out.pasted_annotation_ids = std::move(composed.provenance.pasted_annotation_ids);
  out.occlusion_candidates = composed.occlusion_candidates;
  return out;
}

int live_worker_count() { return g_live_workers.load(); }

SampleStream::SampleStream(std::shared_ptr<const Engine> engine, int workers)
    : engine_(std::move(engine)), window_(static_cast<std::size_t>(std::max(4, 2 * std::max(1, workers)))) {
  const auto n = static_cast<int>(std::min<std::int64_t>(std::max(1, workers), std::max<std::int64_t>(1, engine_->size())));
  if (engine_->size() == 0) return;
  threads_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    g_live_workers.fetch_add(1);
    threads_.emplace_back([this] {
      worker_loop();
      g_live_workers.fetch_sub(1);
    });
  }
}

SampleStream::~SampleStream() { close(); }

void SampleStream::worker_loop() {
  for (;;) {
    std::int64_t k = 0;
    {
      std::unique_lock lock(mu_);
      consumed_.wait(lock, [this] {
        return stopping_ || next_to_claim_ >= engine_->size() ||
               next_to_claim_ < next_to_emit_ + static_cast<std::int64_t>(window_);
      });
      if (stopping_ || next_to_claim_ >= engine_->size()) return;
      k = next_to_claim_++;
    }
    Slot slot;
    try {
      slot.sample = engine_->generate(k);
    } catch (...) {
      slot.error = std::current_exception();
    }
    {
      std::lock_guard lock(mu_);
      ready_.emplace(k, std::move(slot));
    }
    produced_.notify_all();
  }
}

std::optional<OutputSample> SampleStream::next() {
  if (in_next_.exchange(true)) throw Error("SampleStream::next called concurrently; the stream is single-consumer");
  struct Release {
    std::atomic<bool>& flag;
    ~Release() { flag.store(false); }
  } release{in_next_};
  if (closed_) throw Error("sample stream is closed");
  if (next_to_emit_ >= engine_->size()) return std::nullopt;
  Slot slot;
  const std::int64_t k = next_to_emit_;
  {
    std::unique_lock lock(mu_);
    produced_.wait(lock, [this, k] { return ready_.count(k) > 0; });
    auto node = ready_.extract(k);
    slot = std::move(node.mapped());
    ++next_to_emit_;
  }
  consumed_.notify_all();
  if (slot.error) {
    try {
      std::rethrow_exception(slot.error);
    } catch (const std::exception& e) {
      throw Error("item " + std::to_string(k) + ": " + e.what());
    }
  }
  return std::move(slot.sample);
}

void SampleStream::close() {
  if (closed_) return;
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  consumed_.notify_all();
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  threads_.clear();
  closed_ = true;
}

Json run_stats_to_json(const RunStats& s) {
  return {{"samples_emitted", s.samples_emitted},
          {"samples_skipped", s.samples_skipped},
          {"instances_pasted", s.instances_pasted},
          {"occlusion_candidates", s.occlusion_candidates},
          {"instances_removed", s.instances_removed},
          {"mean_visible_area_ratio", s.mean_visible_area_ratio},
          {"elapsed_seconds", s.elapsed_seconds},
          {"samples_per_second", s.samples_per_second}};
}

RunStats stream_samples(std::shared_ptr<const Engine> engine, const std::function<void(OutputSample&&)>& consumer) {
  const auto start = std::chrono::steady_clock::now();
  RunStats stats;
  double ratio_sum = 0.0;
  const OnError policy = engine->config().on_error;
  SampleStream stream(engine, engine->config().workers);
  for (;;) {
    std::optional<OutputSample> sample;
    try {
      sample = stream.next();
    } catch (const Error& e) {
      if (policy == OnError::kAbort) throw;
      std::cerr << "copypaste: skipping " << e.what() << '\n';
      ++stats.samples_skipped;
      continue;
    }
    if (!sample) break;
    stats.instances_pasted += static_cast<std::int64_t>(sample->pasted_annotation_ids.size());
    stats.occlusion_candidates += static_cast<std::int64_t>(sample->occlusion_candidates);
    std::int64_t survivors = 0;
    if (sample->occlusion_candidates > 0) {
      for (std::size_t i = 0; i < sample->annotations.size(); ++i) {
        if (sample->pasted[i] || sample->annotations[i].iscrowd) continue;
        ++survivors;
        ratio_sum += sample->annotations[i].area / sample->pre_occlusion_area[i];
      }
    }
    stats.instances_removed += static_cast<std::int64_t>(sample->occlusion_candidates) - survivors;
    ++stats.samples_emitted;
    consumer(std::move(*sample));
  }
  stream.close();
  if (stats.occlusion_candidates > 0) {
    stats.mean_visible_area_ratio = ratio_sum / static_cast<double>(stats.occlusion_candidates);
  }
  stats.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (stats.elapsed_seconds > 0) stats.samples_per_second = stats.samples_emitted / stats.elapsed_seconds;
  return stats;
}

OutputWriter::OutputWriter(const Engine& engine) : engine_(engine) {}

void OutputWriter::add(const OutputSample& s) {
  ImageRecord img;
  img.id = s.index + 1;
  img.file_name = s.output_file_name();
  img.height = s.image.height();
  img.width = s.image.width();
  Json prov = Json::object();
  prov["plan_index"] = s.index;
  prov["target_pool"] = pool_name(s.target_pool);
  prov["target_image_id"] = s.target_image_id;
  prov["target_transform"] = params_to_json(s.target_params);
  if (s.source_image_id) {
    prov["source_image_id"] = *s.source_image_id;
    prov["source_transform"] = params_to_json(*s.source_params);
  }
  prov["pasted_annotation_ids"] = s.pasted_annotation_ids;
  prov["occlusion_candidates"] = s.occlusion_candidates;
  img.extra["copy_paste"] = std::move(prov);
  images_.push_back(std::move(img));

  for (std::size_t i = 0; i < s.annotations.size(); ++i) {
    const auto& a = s.annotations[i];
    InstanceAnnotation out;
    out.id = next_annotation_id_++;
    out.image_id = s.index + 1;
    out.category_id = a.category_id;
    out.bbox = a.bbox;
    out.area = a.area;
    out.iscrowd = a.iscrowd;
    out.score = a.score;
    out.segmentation = std::holds_alternative<Bitmap>(a.segmentation)
                           ? SegMask(bitmap_to_rle(std::get<Bitmap>(a.segmentation)))
                           : a.segmentation;
    Json prov = Json::object();
    const bool from_target = i < s.target_count;
    prov["origin"] = from_target ? "target" : (s.pasted[i] ? "pasted" : "mixup_source");
    prov["source_annotation_id"] = a.id;
    prov["pseudo"] = from_target && s.target_pool == Pool::kPseudo;
    if (s.pre_occlusion_area[i] > 0) prov["pre_occlusion_area"] = s.pre_occlusion_area[i];
    if (!s.mixup_weight.empty()) prov["mixup_weight"] = s.mixup_weight[i];
    out.extra["copy_paste"] = std::move(prov);
    annotations_.push_back(std::move(out));
  }
}

Dataset OutputWriter::finish() const {
  Json extra = Json::object();
  extra["info"] = {{"description", "copy-paste augmented dataset"},
                   {"seed", engine_.config().seed},
                   {"num_samples", engine_.size()}};
  return Dataset(images_, annotations_, engine_.view().supervised().categories(), std::move(extra));
}

RunStats run(std::shared_ptr<const Engine> engine, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  OutputWriter writer(*engine);
  RunStats stats = stream_samples(engine, [&](OutputSample&& s) {
    write_png(out_dir / s.output_file_name(), s.image);
    writer.add(s);
  });
  write_dataset(writer.finish(), out_dir / "annotations.json");
  return stats;
}

RunStats run(const AugConfig& config, const std::filesystem::path& out_dir) {
  return run(std::make_shared<const Engine>(config), out_dir);
}

}  // namespace copypaste
