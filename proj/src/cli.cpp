#include "copypaste/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "copypaste/config.hpp"
#include "copypaste/error.hpp"
#include "copypaste/longtail.hpp"
#include "copypaste/pipeline.hpp"
#include "copypaste/visualize.hpp"

namespace copypaste {

namespace {

Dataset load_input(const std::string& json_path, const std::string& image_root, const char* flag) {
  if (!std::filesystem::exists(json_path)) {
    throw ConfigError(std::string(flag) + ": file not found: " + json_path);
  }
  try {
    return load_dataset(json_path, image_root.empty() ? std::filesystem::path(json_path).parent_path()
                                                      : std::filesystem::path(image_root));
  } catch (const IoError& e) {
    throw ConfigError(std::string(flag) + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!f.flush()) throw IoError("write failed for " + path);
}

struct AugmentArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::int64_t> num_samples;
  std::string stats;
};

int cmd_augment(const AugmentArgs& a, std::ostream& out) {
  AugConfig config = load_config(a.config);
  apply_env_overrides(config);
  if (a.seed) config.seed = *a.seed;
  if (a.workers) config.workers = *a.workers;
  if (a.num_samples) config.num_samples = *a.num_samples;
  validate_config(config);
  const auto engine = std::make_shared<const Engine>(config);
  const RunStats stats = run(engine, a.out);
  const std::string text = run_stats_to_json(stats).dump(2) + "\n";
  if (!a.stats.empty()) write_text(a.stats, text);
  out << text;
  return kExitOk;
}

struct TableArgs {
  std::string dataset;
  std::string out;
  double t = kDefaultRfsThreshold;
  double beta = kDefaultClassBalancedBeta;
  bool include_crowd = false;
  bool json = false;
};

int cmd_rfs(const TableArgs& a, std::ostream& out) {
  if (!(a.t > 0.0)) throw ConfigError("--t: must be > 0");
  const Dataset d = load_input(a.dataset, "", "--dataset");
  if (d.images().empty()) throw ConfigError("--dataset: dataset has no images");
  std::ostringstream csv;
  write_rfs_csv(csv, d, a.t, a.include_crowd);
  if (a.out.empty()) out << csv.str();
  else write_text(a.out, csv.str());
  return kExitOk;
}

int cmd_cbweights(const TableArgs& a, std::ostream& out) {
  if (!(a.beta > 0.0 && a.beta < 1.0)) throw ConfigError("--beta: must lie in (0, 1)");
  const Dataset d = load_input(a.dataset, "", "--dataset");
  if (d.images().empty()) throw ConfigError("--dataset: dataset has no images");
  const auto weights = class_balanced_weights(instance_counts(d, a.include_crowd), a.beta);
  std::string text;
  if (a.json) {
    text = class_weights_to_json(weights).dump(2) + "\n";
  } else {
    std::ostringstream csv;
    write_class_weights_csv(csv, d, weights);
    text = csv.str();
  }
  if (a.out.empty()) out << text;
  else write_text(a.out, text);
  return kExitOk;
}

struct MergeArgs {
  std::string supervised;
  std::string pseudo;
  std::string out;
  double score_threshold = 0.5;
};

int cmd_merge_pseudo(const MergeArgs& a, std::ostream& out) {
  auto sup = std::make_shared<const Dataset>(load_input(a.supervised, "", "--supervised"));
  const Dataset raw_pseudo = load_input(a.pseudo, "", "--pseudo");
  auto pseudo = std::make_shared<const Dataset>(filter_pseudo(raw_pseudo, a.score_threshold));
  DataMixSpec spec;
  spec.paste_targets = PasteTargets::kBoth;
  const MixedView view = merge_pseudo(sup, pseudo, spec);

  std::int64_t image_offset = 0, ann_offset = 0;
  for (const auto& img : sup->images()) image_offset = std::max(image_offset, img.id);
  for (const auto& ann : sup->annotations()) ann_offset = std::max(ann_offset, ann.id);

  std::vector<ImageRecord> images = sup->images();
  std::vector<InstanceAnnotation> anns = sup->annotations();
  for (auto img : pseudo->images()) {
    img.extra["pseudo"] = true;
    img.extra["pseudo_original_id"] = img.id;
    img.id += image_offset;
    images.push_back(std::move(img));
  }
  for (auto ann : pseudo->annotations()) {
    ann.extra["pseudo"] = true;
    ann.extra["pseudo_original_id"] = ann.id;
    ann.id += ann_offset;
    ann.image_id += image_offset;
    anns.push_back(std::move(ann));
  }
  Json extra = sup->extra();
  extra["pseudo_merge"] = {{"pseudo_score_threshold", a.score_threshold},
                           {"image_id_offset", image_offset},
                           {"annotation_id_offset", ann_offset}};
  const Dataset merged(std::move(images), std::move(anns), sup->categories(), std::move(extra));
  write_dataset(merged, a.out);
  Json summary = {{"supervised_images", view.pool_size(Pool::kSupervised)},
                  {"pseudo_images", view.pool_size(Pool::kPseudo)},
                  {"pseudo_annotations_kept", pseudo->annotations().size()},
                  {"pseudo_annotations_dropped", raw_pseudo.annotations().size() - pseudo->annotations().size()}};
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_inspect(const std::string& dataset, std::ostream& out) {
  const Dataset d = load_input(dataset, "", "--dataset");
  std::map<std::string, std::int64_t> reprs;
  std::int64_t crowd = 0, scored = 0;
  for (const auto& a : d.annotations()) {
    if (std::holds_alternative<PolygonSet>(a.segmentation)) ++reprs["polygons"];
    else ++reprs["rle"];
    crowd += a.iscrowd ? 1 : 0;
    scored += a.score ? 1 : 0;
  }
  Json per_cat = Json::object();
  for (const auto& [c, n] : instance_counts(d, true)) per_cat[std::to_string(c)] = n;
  Json summary = {{"images", d.images().size()},
                  {"annotations", d.annotations().size()},
                  {"categories", d.categories().size()},
                  {"crowd_annotations", crowd},
                  {"scored_annotations", scored},
                  {"segmentation_formats", reprs},
                  {"instances_per_category", per_cat}};
  out << summary.dump(2) << "\n";
  return kExitOk;
}

struct VisualizeArgs {
  std::string dataset;
  std::string images;
  std::int64_t image_id = 0;
  std::string out;
};

int cmd_visualize(const VisualizeArgs& a, std::ostream& out) {
  const Dataset d = load_input(a.dataset, a.images, "--dataset");
  if (!d.image_position(a.image_id)) throw ConfigError("--image-id: unknown image id " + std::to_string(a.image_id));
  const ImageRecord& rec = d.image(a.image_id);
  const Image img = read_image(d.image_path(rec));
  std::vector<InstanceAnnotation> anns;
  for (auto pos : d.annotations_of(rec.id)) anns.push_back(d.annotations()[pos]);
  write_png(a.out, render_overlay(img, anns));
  out << a.out << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Copy-paste augmentation engine for instance segmentation datasets", "copypaste"};
  app.require_subcommand(1);

  AugmentArgs augment;
  auto* aug = app.add_subcommand("augment", "Generate an augmented dataset");
  aug->add_option("--config", augment.config, "Config JSON")->required();
  aug->add_option("--out", augment.out, "Output directory")->required();
  aug->add_option("--seed", augment.seed, "Override the config seed");
  aug->add_option("--workers", augment.workers, "Override the worker count")->check(CLI::PositiveNumber);
  aug->add_option("--num-samples", augment.num_samples, "Override the number of samples")->check(CLI::NonNegativeNumber);
  aug->add_option("--stats", augment.stats, "Also write run statistics JSON here");

  TableArgs rfs_args;
  auto* rfs = app.add_subcommand("rfs", "Per-category image frequency and repeat factors (CSV)");
  rfs->add_option("--dataset", rfs_args.dataset, "COCO JSON")->required();
  rfs->add_option("--t", rfs_args.t, "Repeat factor threshold")->capture_default_str();
  rfs->add_option("--out", rfs_args.out, "CSV path (stdout when omitted)");
  rfs->add_flag("--include-crowd", rfs_args.include_crowd, "Count crowd annotations");

  TableArgs cb_args;
  auto* cb = app.add_subcommand("cbweights", "Class-balanced loss weights (CSV)");
  cb->add_option("--dataset", cb_args.dataset, "COCO JSON of the training split")->required();
  cb->add_option("--beta", cb_args.beta, "Effective-number beta")->capture_default_str();
  cb->add_option("--out", cb_args.out, "Output path (stdout when omitted)");
  cb->add_flag("--include-crowd", cb_args.include_crowd, "Count crowd annotations");
  cb->add_flag("--json", cb_args.json, "Emit JSON instead of CSV");

  MergeArgs merge;
  auto* mp = app.add_subcommand("merge-pseudo", "Merge a pseudo-labeled dataset into a supervised one");
  mp->add_option("--supervised", merge.supervised, "Supervised COCO JSON")->required();
  mp->add_option("--pseudo", merge.pseudo, "Pseudo-labeled COCO JSON")->required();
  mp->add_option("--out", merge.out, "Merged COCO JSON")->required();
  mp->add_option("--score-threshold", merge.score_threshold, "Drop pseudo labels scoring below this")
      ->capture_default_str();

  std::string inspect_path;
  auto* insp = app.add_subcommand("inspect", "Summarize a dataset");
  insp->add_option("--dataset", inspect_path, "COCO JSON")->required();

  VisualizeArgs vis;
  auto* vz = app.add_subcommand("visualize", "Render an annotation overlay PNG");
  vz->add_option("--dataset", vis.dataset, "COCO JSON")->required();
  vz->add_option("--images", vis.images, "Image directory (defaults to the JSON's directory)");
  vz->add_option("--image-id", vis.image_id, "Image id")->required();
  vz->add_option("--out", vis.out, "Output PNG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*aug) return cmd_augment(augment, out);
    if (*rfs) return cmd_rfs(rfs_args, out);
    if (*cb) return cmd_cbweights(cb_args, out);
    if (*mp) return cmd_merge_pseudo(merge, out);
    if (*insp) return cmd_inspect(inspect_path, out);
    if (*vz) return cmd_visualize(vis, out);
  } catch (const ConfigError& e) {
    err << "copypaste: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "copypaste: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "copypaste: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace copypaste
