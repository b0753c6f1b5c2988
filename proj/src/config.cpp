#include "copypaste/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "copypaste/error.hpp"

namespace copypaste {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) { throw ConfigError(field + ": " + why); }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

void reject_unknown(const Json& obj, const std::string& where, std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) fail(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
  }
}

template <typename T>
T get_as(const Json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const Json::exception&) {
    fail(field, "has the wrong type (" + j.dump() + ")");
  }
}

double get_number(const Json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "must be finite");
  return v;
}

double get_fraction(const Json& j, const std::string& field) {
  const double v = get_number(j, field);
  if (v < 0.0 || v > 1.0) fail(field, "must lie in [0, 1]");
  return v;
}

JitterMode jitter_from_json(const Json& j, const std::string& field) {
  JitterMode m;
  if (j.is_string()) {
    const auto s = lower(j.get<std::string>());
    if (s == "ssj") return JitterMode::ssj();
    if (s == "lsj") return JitterMode::lsj();
    fail(field, "unknown jitter mode '" + j.get<std::string>() + "' (expected ssj, lsj, fixed or range)");
  }
  if (!j.is_object() || !j.contains("kind")) fail(field, "must be \"ssj\", \"lsj\" or an object with \"kind\"");
  const auto kind = lower(get_as<std::string>(j["kind"], field + ".kind"));
  if (kind == "ssj" || kind == "lsj") {
    reject_unknown(j, field, {"kind"});
    m = kind == "ssj" ? JitterMode::ssj() : JitterMode::lsj();
  } else if (kind == "fixed") {
    reject_unknown(j, field, {"kind", "scale"});
    if (!j.contains("scale")) fail(field + ".scale", "is required for fixed jitter");
    m = JitterMode::fixed(get_number(j["scale"], field + ".scale"));
  } else if (kind == "range") {
    reject_unknown(j, field, {"kind", "min", "max"});
    if (!j.contains("min") || !j.contains("max")) fail(field, "range jitter needs min and max");
    m = JitterMode::range(get_number(j["min"], field + ".min"), get_number(j["max"], field + ".max"));
  } else {
    fail(field + ".kind", "unknown jitter mode '" + kind + "'");
  }
  if (auto why = m.validate(); !why.empty()) fail(field, why);
  return m;
}

Json jitter_to_json(const JitterMode& m) {
  switch (m.kind) {
    case JitterMode::Kind::kSsj:
      return {{"kind", "ssj"}};
    case JitterMode::Kind::kLsj:
      return {{"kind", "lsj"}};
    case JitterMode::Kind::kFixed:
      return {{"kind", "fixed"}, {"scale", m.lo}};
    case JitterMode::Kind::kRange:
      return {{"kind", "range"}, {"min", m.lo}, {"max", m.hi}};
  }
  return {};
}

PastePolicy policy_from_json(const Json& j, const std::string& field) {
  std::string kind;
  if (j.is_string()) {
    kind = lower(j.get<std::string>());
  } else if (j.is_object() && j.contains("kind")) {
    reject_unknown(j, field, {"kind", "keep_probability"});
    kind = lower(get_as<std::string>(j["kind"], field + ".kind"));
  } else {
    fail(field, "must be a policy name or an object with \"kind\"");
  }
  if (kind == "all_objects") return PastePolicy::all_objects();
  if (kind == "one_object") return PastePolicy::one_object();
  if (kind == "random_subset") {
    double p = 0.5;
    if (j.is_object() && j.contains("keep_probability")) {
      p = get_fraction(j["keep_probability"], field + ".keep_probability");
    }
    return PastePolicy::random_subset(p);
  }
  fail(field, "unknown paste policy '" + kind + "' (expected random_subset, one_object or all_objects)");
}

Json policy_to_json(const PastePolicy& p) {
  switch (p.kind) {
    case PastePolicy::Kind::kAllObjects:
      return {{"kind", "all_objects"}};
    case PastePolicy::Kind::kOneObject:
      return {{"kind", "one_object"}};
    case PastePolicy::Kind::kRandomSubset:
      return {{"kind", "random_subset"}, {"keep_probability", p.keep_probability}};
  }
  return {};
}

DatasetSource source_from_json(const Json& j, const std::string& field, const std::filesystem::path& base) {
  if (!j.is_object()) fail(field, "must be an object with annotations and images");
  reject_unknown(j, field, {"annotations", "images"});
  if (!j.contains("annotations")) fail(field + ".annotations", "is required");
  DatasetSource s;
  auto resolve = [&base](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
  };
  s.annotations = resolve(get_as<std::string>(j["annotations"], field + ".annotations"));
  s.images = j.contains("images") ? resolve(get_as<std::string>(j["images"], field + ".images"))
                                  : s.annotations.parent_path();
  return s;
}

Json source_to_json(const DatasetSource& s) {
  return {{"annotations", s.annotations.generic_string()}, {"images", s.images.generic_string()}};
}

const char* targets_name(PasteTargets t) {
  switch (t) {
    case PasteTargets::kSupervisedOnly:
      return "supervised_only";
    case PasteTargets::kPseudoOnly:
      return "pseudo_only";
    case PasteTargets::kBoth:
      return "both";
  }
  return "";
}

DataMixSpec mix_from_json(const Json& j, const std::filesystem::path& base) {
  if (!j.is_object()) fail("mix", "must be an object");
  reject_unknown(j, "mix",
                 {"supervised", "pseudo", "batch_fraction_supervised", "paste_targets", "paste_sources",
                  "pseudo_score_threshold"});
  DataMixSpec m;
  if (!j.contains("supervised")) fail("mix.supervised", "is required");
  m.supervised = source_from_json(j["supervised"], "mix.supervised", base);
  if (j.contains("pseudo") && !j["pseudo"].is_null()) m.pseudo = source_from_json(j["pseudo"], "mix.pseudo", base);
  if (j.contains("batch_fraction_supervised")) {
    m.batch_fraction_supervised = get_fraction(j["batch_fraction_supervised"], "mix.batch_fraction_supervised");
  }
  if (j.contains("paste_targets")) {
    const auto t = lower(get_as<std::string>(j["paste_targets"], "mix.paste_targets"));
    if (t == "supervised_only") m.paste_targets = PasteTargets::kSupervisedOnly;
    else if (t == "pseudo_only") m.paste_targets = PasteTargets::kPseudoOnly;
    else if (t == "both") m.paste_targets = PasteTargets::kBoth;
    else fail("mix.paste_targets", "unknown value '" + t + "' (expected supervised_only, pseudo_only or both)");
  }
  if (j.contains("paste_sources")) {
    const auto s = lower(get_as<std::string>(j["paste_sources"], "mix.paste_sources"));
    if (s != "supervised_only") fail("mix.paste_sources", "only supervised_only is supported");
  }
  if (j.contains("pseudo_score_threshold")) {
    m.pseudo_score_threshold = get_number(j["pseudo_score_threshold"], "mix.pseudo_score_threshold");
  }
  return m;
}

}  // namespace

AugConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: must be a JSON object");
  reject_unknown(j, "",
                 {"target_size", "main_jitter", "pasted_jitter", "paste_policy", "blend", "copy_paste_enabled",
                  "mixup_enabled", "mixup_lambda", "seed", "min_visible_pixels", "workers", "rfs", "mix",
                  "pad_value", "random_placement", "paste_translation", "num_samples", "on_error"});
  AugConfig c;
  if (j.contains("target_size")) {
    const auto ts = get_as<std::vector<int>>(j["target_size"], "target_size");
    if (ts.size() != 2) fail("target_size", "must be [height, width]");
    c.target_size = {ts[0], ts[1]};
  }
  if (j.contains("main_jitter")) c.main_jitter = jitter_from_json(j["main_jitter"], "main_jitter");
  if (j.contains("pasted_jitter")) c.pasted_jitter = jitter_from_json(j["pasted_jitter"], "pasted_jitter");
  if (j.contains("paste_policy")) c.paste_policy = policy_from_json(j["paste_policy"], "paste_policy");
  if (j.contains("blend")) {
    const auto& b = j["blend"];
    if (!b.is_object()) fail("blend", "must be an object");
    reject_unknown(b, "blend", {"enabled", "sigma", "kernel_radius"});
    if (b.contains("enabled")) c.blend.enabled = get_as<bool>(b["enabled"], "blend.enabled");
    if (b.contains("sigma")) c.blend.sigma = get_number(b["sigma"], "blend.sigma");
    if (b.contains("kernel_radius")) c.blend.kernel_radius = get_as<int>(b["kernel_radius"], "blend.kernel_radius");
  }
  if (j.contains("copy_paste_enabled")) c.copy_paste_enabled = get_as<bool>(j["copy_paste_enabled"], "copy_paste_enabled");
  if (j.contains("mixup_enabled")) c.mixup_enabled = get_as<bool>(j["mixup_enabled"], "mixup_enabled");
  if (j.contains("mixup_lambda")) c.mixup_lambda = get_fraction(j["mixup_lambda"], "mixup_lambda");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("min_visible_pixels")) {
    c.min_visible_pixels = get_as<std::int64_t>(j["min_visible_pixels"], "min_visible_pixels");
  }
  if (j.contains("workers")) c.workers = get_as<int>(j["workers"], "workers");
  if (j.contains("rfs") && !j["rfs"].is_null()) c.rfs = get_number(j["rfs"], "rfs");
  if (j.contains("mix")) c.mix = mix_from_json(j["mix"], base_dir);
  else fail("mix", "is required (at least mix.supervised)");
  if (j.contains("pad_value")) {
    const auto pv = get_as<std::vector<int>>(j["pad_value"], "pad_value");
    if (pv.size() != 3) fail("pad_value", "must have 3 channels");
    for (int i = 0; i < 3; ++i) {
      if (pv[i] < 0 || pv[i] > 255) fail("pad_value", "channels must lie in [0, 255]");
      c.pad_value[i] = static_cast<std::uint8_t>(pv[i]);
    }
  }
  if (j.contains("random_placement")) c.random_placement = get_as<bool>(j["random_placement"], "random_placement");
  if (j.contains("paste_translation")) c.paste_translation = get_fraction(j["paste_translation"], "paste_translation");
  if (j.contains("num_samples") && !j["num_samples"].is_null()) {
    c.num_samples = get_as<std::int64_t>(j["num_samples"], "num_samples");
  }
  if (j.contains("on_error")) {
    const auto e = lower(get_as<std::string>(j["on_error"], "on_error"));
    if (e == "abort") c.on_error = OnError::kAbort;
    else if (e == "skip") c.on_error = OnError::kSkip;
    else fail("on_error", "expected abort or skip");
  }
  validate_config(c);
  return c;
}

Json config_to_json(const AugConfig& c) {
  Json j = Json::object();
  j["target_size"] = {c.target_size.height, c.target_size.width};
  j["main_jitter"] = jitter_to_json(c.main_jitter);
  j["pasted_jitter"] = jitter_to_json(c.pasted_jitter);
  j["paste_policy"] = policy_to_json(c.paste_policy);
  j["blend"] = {{"enabled", c.blend.enabled}, {"sigma", c.blend.sigma}, {"kernel_radius", c.blend.kernel_radius}};
  j["copy_paste_enabled"] = c.copy_paste_enabled;
  j["mixup_enabled"] = c.mixup_enabled;
  j["mixup_lambda"] = c.mixup_lambda;
  j["seed"] = c.seed;
  j["min_visible_pixels"] = c.min_visible_pixels;
  j["workers"] = c.workers;
  j["rfs"] = c.rfs ? Json(*c.rfs) : Json(nullptr);
  Json mix = Json::object();
  mix["supervised"] = source_to_json(c.mix.supervised);
  mix["pseudo"] = c.mix.pseudo ? source_to_json(*c.mix.pseudo) : Json(nullptr);
  mix["batch_fraction_supervised"] = c.mix.batch_fraction_supervised;
  mix["paste_targets"] = targets_name(c.mix.paste_targets);
  mix["paste_sources"] = "supervised_only";
  mix["pseudo_score_threshold"] = c.mix.pseudo_score_threshold;
  j["mix"] = std::move(mix);
  j["pad_value"] = {c.pad_value[0], c.pad_value[1], c.pad_value[2]};
  j["random_placement"] = c.random_placement;
  j["paste_translation"] = c.paste_translation;
  j["num_samples"] = c.num_samples ? Json(*c.num_samples) : Json(nullptr);
  j["on_error"] = c.on_error == OnError::kAbort ? "abort" : "skip";
  return j;
}

void validate_config(const AugConfig& c) {
  if (c.target_size.height < 1 || c.target_size.width < 1) fail("target_size", "sides must be >= 1");
  if (auto why = c.main_jitter.validate(); !why.empty()) fail("main_jitter", why);
  if (auto why = c.pasted_jitter.validate(); !why.empty()) fail("pasted_jitter", why);
  if (c.paste_policy.keep_probability < 0.0 || c.paste_policy.keep_probability > 1.0) {
    fail("paste_policy.keep_probability", "must lie in [0, 1]");
  }
  if (c.blend.enabled && !(c.blend.sigma > 0.0)) fail("blend.sigma", "must be > 0 when blending is enabled");
  if (c.blend.kernel_radius < 0) fail("blend.kernel_radius", "must be >= 0");
  if (c.copy_paste_enabled && c.mixup_enabled) {
    fail("mixup_enabled", "copy_paste_enabled and mixup_enabled are mutually exclusive");
  }
  if (c.mixup_lambda < 0.0 || c.mixup_lambda > 1.0) fail("mixup_lambda", "must lie in [0, 1]");
  if (c.min_visible_pixels < 0) fail("min_visible_pixels", "must be >= 0");
  if (c.workers < 1) fail("workers", "must be >= 1");
  if (c.rfs && !(*c.rfs > 0.0)) fail("rfs", "threshold must be > 0");
  if (c.num_samples && *c.num_samples < 0) fail("num_samples", "must be >= 0");
  if (c.mix.batch_fraction_supervised < 0.0 || c.mix.batch_fraction_supervised > 1.0) {
    fail("mix.batch_fraction_supervised", "must lie in [0, 1]");
  }
  if (c.mix.paste_targets != PasteTargets::kSupervisedOnly && !c.mix.pseudo) {
    fail("mix.pseudo", "is required when paste_targets includes pseudo data");
  }
  if (c.mix.supervised.annotations.empty()) fail("mix.supervised.annotations", "is required");
}

AugConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config: malformed JSON in " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

void apply_env_overrides(AugConfig& c) {
  auto parse = [](const char* name, const char* text) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(text, &end, 10);
    if (errno != 0 || end == text || *end != '\0') fail(name, std::string("not an unsigned integer: ") + text);
    return v;
  };
  if (const char* s = std::getenv("COPYPASTE_SEED"); s && *s) c.seed = parse("COPYPASTE_SEED", s);
  if (const char* w = std::getenv("COPYPASTE_WORKERS"); w && *w) {
    c.workers = static_cast<int>(parse("COPYPASTE_WORKERS", w));
  }
  validate_config(c);
}

}  // namespace copypaste
