#include "copypaste/longtail.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "copypaste/error.hpp"

namespace copypaste {

namespace {

// Shortest representation that round-trips.
std::string fmt_double(double v) { return Json(v).dump(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

CategoryFrequency category_frequency(const Dataset& d, bool include_crowd) {
  if (d.images().empty()) throw FormatError("category frequency needs a non-empty dataset");
  CategoryFrequency f;
  f.total_images = static_cast<std::int64_t>(d.images().size());
  for (const auto& img : d.images()) {
    std::set<std::int64_t> present;
    for (auto pos : d.annotations_of(img.id)) {
      const auto& a = d.annotations()[pos];
      if (!a.iscrowd || include_crowd) present.insert(a.category_id);
    }
    for (auto c : present) ++f.images[c];
  }
  for (const auto& [c, n] : f.images) f.fraction[c] = static_cast<double>(n) / static_cast<double>(f.total_images);
  return f;
}

double repeat_factor(double frequency, double threshold) {
  if (!(frequency > 0.0 && frequency <= 1.0)) throw ConfigError("category frequency must lie in (0, 1]");
  if (!(threshold > 0.0)) throw ConfigError("RFS threshold t must be > 0");
  return std::max(1.0, std::sqrt(threshold / frequency));
}

std::vector<double> image_repeat_factors(const Dataset& d, double threshold, bool include_crowd) {
  const auto freq = category_frequency(d, include_crowd);
  std::map<std::int64_t, double> per_category;
  for (const auto& [c, f] : freq.fraction) per_category[c] = repeat_factor(f, threshold);
  std::vector<double> out;
  out.reserve(d.images().size());
  for (const auto& img : d.images()) {
    double r = 1.0;
    for (auto pos : d.annotations_of(img.id)) {
      const auto& a = d.annotations()[pos];
      if (!a.iscrowd || include_crowd) r = std::max(r, per_category.at(a.category_id));
    }
    out.push_back(r);
  }
  return out;
}

std::vector<std::size_t> rfs_epoch_positions(const std::vector<double>& factors, Rng& rng) {
  std::vector<std::size_t> epoch;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const double whole = std::floor(factors[i]);
    auto copies = static_cast<std::size_t>(whole);
    if (rng.uniform() < factors[i] - whole) ++copies;
    epoch.insert(epoch.end(), copies, i);
  }
  rng.shuffle(epoch);
  return epoch;
}

std::vector<std::int64_t> rfs_epoch(const Dataset& d, double threshold, Rng& rng, bool include_crowd) {
  const auto positions = rfs_epoch_positions(image_repeat_factors(d, threshold, include_crowd), rng);
  std::vector<std::int64_t> ids;
  ids.reserve(positions.size());
  for (auto p : positions) ids.push_back(d.images()[p].id);
  return ids;
}

std::map<std::int64_t, std::int64_t> instance_counts(const Dataset& d, bool include_crowd) {
  std::map<std::int64_t, std::int64_t> counts;
  for (const auto& a : d.annotations()) {
    if (!a.iscrowd || include_crowd) ++counts[a.category_id];
  }
  return counts;
}

double class_balanced_raw(std::int64_t n, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("class-balanced beta must lie in (0, 1)");
  if (n < 1) throw ConfigError("class-balanced weights need at least one instance per category");
  if (n == 1) return 1.0;
  // 1 - beta^n computed as -expm1(n * log(beta)) to keep precision near 1.
  const double denom = -std::expm1(static_cast<double>(n) * std::log1p(beta - 1.0));
  return (1.0 - beta) / denom;
}

ClassWeights class_balanced_weights(const std::map<std::int64_t, std::int64_t>& counts, double beta) {
  ClassWeights w;
  w.beta = beta;
  if (counts.empty()) return w;
  double total = 0.0;
  for (const auto& [c, n] : counts) {
    if (n < 1) throw ConfigError("category " + std::to_string(c) + " has no instances");
    ClassWeightRow row;
    row.category_id = c;
    row.instances = n;
    row.raw = class_balanced_raw(n, beta);
    total += row.raw;
    w.rows.push_back(row);
  }
  const double mean = total / static_cast<double>(w.rows.size());
  for (auto& row : w.rows) {
    row.normalized = row.raw / mean;
    row.clipped = std::clamp(row.normalized, kClassWeightMin, kClassWeightMax);
  }
  return w;
}

void write_rfs_csv(std::ostream& out, const Dataset& d, double threshold, bool include_crowd) {
  const auto freq = category_frequency(d, include_crowd);
  out << "# repeat factor sampling, t=" << fmt_double(threshold) << '\n';
  out << "category_id,name,images,frequency,repeat_factor\n";
  for (const auto& [c, f] : freq.fraction) {
    const auto* cat = d.category(c);
    out << c << ',' << csv_field(cat ? cat->name : "") << ',' << freq.images.at(c) << ',' << fmt_double(f) << ','
        << fmt_double(repeat_factor(f, threshold)) << '\n';
  }
}

void write_class_weights_csv(std::ostream& out, const Dataset& d, const ClassWeights& w) {
  out << "# class-balanced weights, beta=" << fmt_double(w.beta) << ", clip=[" << fmt_double(kClassWeightMin)
      << "," << fmt_double(kClassWeightMax) << "]\n";
  out << "category_id,name,instances,raw,normalized,clipped\n";
  for (const auto& row : w.rows) {
    const auto* cat = d.category(row.category_id);
    out << row.category_id << ',' << csv_field(cat ? cat->name : "") << ',' << row.instances << ','
        << fmt_double(row.raw) << ',' << fmt_double(row.normalized) << ',' << fmt_double(row.clipped) << '\n';
  }
}

Json class_weights_to_json(const ClassWeights& w) {
  Json j = Json::object();
  j["beta"] = w.beta;
  j["clip"] = {kClassWeightMin, kClassWeightMax};
  Json rows = Json::array();
  for (const auto& r : w.rows) {
    rows.push_back({{"category_id", r.category_id},
                    {"instances", r.instances},
                    {"raw", r.raw},
                    {"normalized", r.normalized},
                    {"clipped", r.clipped}});
  }
  j["categories"] = std::move(rows);
  return j;
}

}  // namespace copypaste
