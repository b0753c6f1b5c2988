// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "copypaste/copy_paste.hpp"
#include "copypaste/longtail.hpp"
#include "copypaste/mask.hpp"
#include "copypaste/pipeline.hpp"
#include "copypaste/transforms.hpp"
#include "support/fixtures.hpp"

using namespace copypaste;
namespace cpt = copypaste::testing;
using Big = boost::multiprecision::cpp_dec_float_50;
using Clock = std::chrono::steady_clock;

namespace {

/// Collects the first few failure messages of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ < 5) messages_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::string s;
    for (const auto& m : messages_) s += "; " + m;
    if (failures_ > 5) s += "; ... (" + std::to_string(failures_) + " failures)";
    return s;
  }

 private:
  int failures_ = 0;
  std::vector<std::string> messages_;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

Image random_image(Rng& rng, int h, int w) {
  Image img(h, w);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

InstanceAnnotation bitmap_instance(std::int64_t id, const Bitmap& m) {
  InstanceAnnotation a;
  a.id = id;
  a.category_id = 1;
  a.segmentation = m;
  a.area = static_cast<double>(mask_area(m));
  a.bbox = tight_bbox(m);
  return a;
}

/// The box is tight iff every side touches a set pixel.
bool shrink_by_one_loses_pixel(const Bitmap& m, const BBox& box) {
  const int x0 = static_cast<int>(box[0]), y0 = static_cast<int>(box[1]);
  const int x1 = x0 + static_cast<int>(box[2]) - 1, y1 = y0 + static_cast<int>(box[3]) - 1;
  auto column = [&](int x) {
    for (int y = y0; y <= y1; ++y)
      if (m.at(x, y)) return true;
    return false;
  };
  auto row = [&](int y) {
    for (int x = x0; x <= x1; ++x)
      if (m.at(x, y)) return true;
    return false;
  };
  std::int64_t inside = 0;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) inside += m.at(x, y) ? 1 : 0;
  return column(x0) && column(x1) && row(y0) && row(y1) && inside == mask_area(m);
}

// 1. RLE codec ---------------------------------------------------------------

std::string rle_codec(Check& c) {
  const auto t0 = Clock::now();
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const int h = 1 + static_cast<int>(rng.below(64)), w = 1 + static_cast<int>(rng.below(64));
    const double density = i % 10 == 0 ? (i % 20 == 0 ? 0.0 : 1.0) : rng.uniform();
    const Bitmap b = cpt::random_bitmap(rng, h, w, density);
    const Rle r = bitmap_to_rle(b);
    const std::string s = compress_rle(r);
    const Rle back = decompress_rle(s, h, w);
    c.expect(back == r, "case " + std::to_string(i) + ": compressed round trip");
    c.expect(rle_to_bitmap(back) == b, "case " + std::to_string(i) + ": bitmap round trip");
    c.expect(rle_area(r) == mask_area(b), "case " + std::to_string(i) + ": area");
  }
  std::ifstream in(std::string(COPYPASTE_FIXTURE_DIR) + "/rle_golden.json");
  c.expect(static_cast<bool>(in), "golden fixture missing");
  std::size_t golden = 0;
  if (in) {
    const Json g = Json::parse(in);
    for (const auto& k : g["cases"]) {
      const int h = k["size"][0], w = k["size"][1];
      Bitmap b(h, w);
      for (int y = 0; y < h; ++y) {
        const auto row = k["rows"][y].get<std::string>();
        for (int x = 0; x < w; ++x) b.set(x, y, row[x] == '1');
      }
      const std::string expected = k["compressed"];
      c.expect(compress_rle(bitmap_to_rle(b)) == expected, "golden " + k["name"].get<std::string>());
      c.expect(rle_to_bitmap(decompress_rle(expected, h, w)) == b, "golden decode " + k["name"].get<std::string>());
      ++golden;
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 10.0, "runtime " + num(secs) + " s");
  return "1000 random bitmaps, " + std::to_string(golden) + " golden strings, " + num(secs) + " s";
}

// 2. Blend partition ---------------------------------------------------------

std::string blend_partition(Check& c) {
  Rng rng(77);
  std::int64_t src_pixels = 0;
  for (int t = 0; t < 100; ++t) {
    const int h = 64, w = 64;
    TransformedSample target, src;
    target.image = random_image(rng, h, w);
    src.image = random_image(rng, h, w);
    target.params = src.params = identity_params({h, w});
    const int n_src = 1 + static_cast<int>(rng.below(4));
    for (int k = 0; k < n_src; ++k)
      src.annotations.push_back(bitmap_instance(k + 1, cpt::random_bitmap(rng, h, w, 0.05 + 0.3 * rng.uniform())));
    for (int k = 0; k < 3; ++k)
      target.annotations.push_back(bitmap_instance(k + 10, cpt::random_bitmap(rng, h, w, 0.2)));
    std::vector<std::size_t> subset;
    for (std::size_t k = 0; k < src.annotations.size(); ++k)
      if (rng.bernoulli(0.6) || k == 0) subset.push_back(k);
    const ComposedSample out = paste(target, src, subset, BlendConfig{});

    // Oracle: a pixel comes from src iff some selected mask covers it.
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        bool covered = false;
        for (auto k : subset) covered = covered || std::get<Bitmap>(src.annotations[k].segmentation).at(x, y);
        const auto* expect = covered ? src.image.pixel(x, y) : target.image.pixel(x, y);
        const auto* got = out.image.pixel(x, y);
        const bool same = std::equal(got, got + 3, expect);
        c.expect(same, "composite " + std::to_string(t) + " pixel (" + std::to_string(x) + "," +
                           std::to_string(y) + ")");
        c.expect(out.binary_alpha.at(x, y) == covered, "composite " + std::to_string(t) + " alpha support");
        c.expect(out.alpha.at(x, y) == (covered ? 1.0 : 0.0), "composite " + std::to_string(t) + " alpha value");
        src_pixels += covered ? 1 : 0;
      }
    }
  }
  return "100 composites, " + std::to_string(src_pixels) + " pasted pixels";
}

// 3. Annotation update -------------------------------------------------------

std::string annotation_update(Check& c) {
  Rng rng(5150);
  int removed = 0, full = 0;
  for (int t = 0; t < 500; ++t) {
    const int h = 1 + static_cast<int>(rng.below(48)), w = 1 + static_cast<int>(rng.below(48));
    Bitmap mask = cpt::random_bitmap(rng, h, w, 0.05 + 0.5 * rng.uniform());
    if (mask_area(mask) == 0) mask.set(static_cast<int>(rng.below(w)), static_cast<int>(rng.below(h)), true);
    Bitmap alpha = cpt::random_bitmap(rng, h, w, rng.uniform());
    const bool force_full = t % 5 == 0;
    if (force_full) {
      // Alpha covering the whole mask plus noise elsewhere.
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (mask.at(x, y)) alpha.set(x, y, true);
    }
    const std::int64_t original = mask_area(mask);
    std::int64_t overlap = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) overlap += (mask.at(x, y) && alpha.at(x, y)) ? 1 : 0;
    const std::vector targets{bitmap_instance(1, mask)};
    const auto out = update_annotations(targets, alpha);
    const std::string tag = "pair " + std::to_string(t);
    if (overlap == original) {
      ++full;
      c.expect(out.empty(), tag + ": fully occluded instance kept");
      removed += out.empty() ? 1 : 0;
      continue;
    }
    if (out.size() != 1) {
      c.expect(false, tag + ": partially visible instance dropped");
      continue;
    }
    const Bitmap& vis = std::get<Bitmap>(out[0].segmentation);
    const std::int64_t visible = mask_area(vis);
    c.expect(visible + overlap == original, tag + ": visible + overlap != original");
    c.expect(out[0].area == static_cast<double>(visible), tag + ": area field");
    c.expect(shrink_by_one_loses_pixel(vis, out[0].bbox), tag + ": bbox not tight");
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) c.expect(vis.at(x, y) == (mask.at(x, y) && !alpha.at(x, y)), tag + ": mask");
  }
  c.expect(full >= 100, "too few full-occlusion cases: " + std::to_string(full));
  return "500 pairs, " + std::to_string(removed) + "/" + std::to_string(full) + " fully occluded removed";
}

// 4. Jitter ranges -----------------------------------------------------------

std::string jitter_ranges(Check& c) {
  std::string report;
  struct Mode {
    const char* name;
    JitterMode mode;
    double lo, hi;
  };
  for (const Mode& m : {Mode{"SSJ", JitterMode::ssj(), 0.8, 1.25}, Mode{"LSJ", JitterMode::lsj(), 0.1, 2.0}}) {
    Rng rng = Rng::keyed(9, 1, "acceptance");
    double sum = 0;
    for (int i = 0; i < 100000; ++i) {
      const auto p = sample_params(m.mode, {64, 64}, {64, 64}, rng);
      c.expect(p.scale >= m.lo && p.scale <= m.hi, std::string(m.name) + " scale " + num(p.scale));
      sum += p.scale;
    }
    const double mean = sum / 100000, expected = (m.lo + m.hi) / 2;
    c.expect(std::abs(mean - expected) <= 0.01 * expected, std::string(m.name) + " mean " + num(mean));
    report += std::string(m.name) + " mean " + num(mean) + ", ";
  }

  // Padding: every canvas pixel outside the placed image equals pad_value.
  Rng rng(10);
  std::int64_t padded = 0;
  for (int t = 0; t < 200; ++t) {
    const Rgb pad{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                  static_cast<std::uint8_t>(rng.below(256))};
    const int sh = 8 + static_cast<int>(rng.below(57)), sw = 8 + static_cast<int>(rng.below(57));
    const Image img = random_image(rng, sh, sw);
    SampleOptions opt{pad, t % 2 == 1};
    const auto p = sample_params(JitterMode::lsj(), {64, 64}, {sh, sw}, rng, opt);
    const auto out = apply_transform(img, {}, p);
    const int vis_w = std::min(p.scaled.width, 64), vis_h = std::min(p.scaled.height, 64);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const bool inside =
            x >= p.place_x && x < p.place_x + vis_w && y >= p.place_y && y < p.place_y + vis_h;
        if (inside) continue;
        ++padded;
        const auto* px = out.image.pixel(x, y);
        c.expect(px[0] == pad[0] && px[1] == pad[1] && px[2] == pad[2],
                 "transform " + std::to_string(t) + " padded pixel differs");
      }
    }
  }
  return report + std::to_string(padded) + " padded pixels checked";
}

// 5. Repeat-factor sampling --------------------------------------------------

/// 20 images; category c appears in images 0..(20/c - 1), so image-level
/// frequencies fall off as 1/c.
Dataset zipf_dataset(int images, int categories) {
  std::vector<ImageRecord> imgs;
  std::vector<InstanceAnnotation> anns;
  std::vector<CategoryRecord> cats;
  for (int c = 1; c <= categories; ++c) cats.push_back({c, "c" + std::to_string(c), Json::object()});
  std::int64_t id = 1;
  for (int i = 0; i < images; ++i) {
    imgs.push_back({i + 1, "z" + std::to_string(i) + ".png", 4, 4, Json::object()});
    for (int c = 1; c <= categories; ++c) {
      if (i >= std::max(1, images / c)) continue;
      for (int k = 0; k < 1 + (c % 3); ++k) {
        InstanceAnnotation a;
        a.id = id++;
        a.image_id = i + 1;
        a.category_id = c;
        a.segmentation = PolygonSet{{{0, 0, 2, 0, 2, 2, 0, 2}}};
        a.bbox = {0, 0, 2, 2};
        a.area = 4;
        anns.push_back(a);
      }
    }
  }
  return Dataset(std::move(imgs), std::move(anns), std::move(cats));
}

std::string rfs(Check& c) {
  const Dataset d = zipf_dataset(20, 12);
  double worst = 0;
  for (double t : {kDefaultRfsThreshold, 0.3, 0.9}) {
    const auto freq = category_frequency(d);
    for (const auto& [cat, images] : freq.images) {
      const Big fb = Big(images) / Big(freq.total_images);
      Big r = boost::multiprecision::sqrt(Big(t) / fb);
      if (r < 1) r = 1;
      const double err = std::abs(repeat_factor(freq.fraction.at(cat), t) - static_cast<double>(r));
      worst = std::max(worst, err);
      c.expect(err <= 1e-12, "category " + std::to_string(cat) + " t=" + num(t) + " error " + num(err));
    }
  }
  // Spot values across the whole frequency range.
  for (double f : {1e-6, 1e-4, 3.7e-4, 1e-3, 0.01, 0.5, 1.0}) {
    const Big r = boost::multiprecision::max(Big(1), boost::multiprecision::sqrt(Big(0.001) / Big(f)));
    const double err = std::abs(repeat_factor(f, 0.001) - static_cast<double>(r));
    worst = std::max(worst, err);
    c.expect(err <= 1e-12, "f=" + num(f) + " error " + num(err));
  }

  const int epochs = 10000;
  int outside = 0;
  for (double t : {kDefaultRfsThreshold, 0.3}) {
    const auto factors = image_repeat_factors(d, t);
    std::vector<double> count(factors.size(), 0);
    Rng rng = Rng::keyed(31, static_cast<std::uint64_t>(t * 1000), "rfs");
    for (int e = 0; e < epochs; ++e)
      for (auto id : rfs_epoch(d, t, rng)) count[*d.image_position(id)] += 1;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      const double p = factors[i] - std::floor(factors[i]);
      const double sigma = std::sqrt(epochs * p * (1 - p));
      const double dev = std::abs(count[i] - epochs * factors[i]);
      const bool ok = sigma == 0 ? dev == 0 : dev <= 3 * sigma;
      outside += ok ? 0 : 1;
      c.expect(ok, "image " + std::to_string(i) + " t=" + num(t) + " count " + num(count[i]) + " vs " +
                       num(epochs * factors[i]));
    }
  }
  return "max factor error " + num(worst) + ", " + std::to_string(outside) + " images outside 3 sigma";
}

// 6. Class-balanced weights --------------------------------------------------

std::string class_weights(Check& c) {
  const double beta = kDefaultClassBalancedBeta;
  c.expect(class_balanced_raw(1, beta) == 1.0, "n=1 weight is not 1.0");
  const double limit = class_balanced_raw(100000000, beta);
  c.expect(std::abs(limit - (1 - beta)) <= 1e-9, "large-n limit " + num(limit));

  Rng rng(606);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    std::map<std::int64_t, std::int64_t> counts;
    const int cats = 2 + static_cast<int>(rng.below(200));
    for (int k = 0; k < cats; ++k) counts[k + 1] = 1 + static_cast<std::int64_t>(std::pow(10.0, 6 * rng.uniform()));
    counts[1] = 1;  // always one singleton class
    const auto w = class_balanced_weights(counts, beta);
    Big raw_sum = 0;
    std::vector<Big> raw;
    const Big b(beta);
    for (const auto& [cat, n] : counts) {
      raw.push_back((Big(1) - b) / (Big(1) - boost::multiprecision::pow(b, static_cast<long long>(n))));
      raw_sum += raw.back();
    }
    const Big mean = raw_sum / static_cast<long long>(counts.size());
    double norm_mean = 0;
    for (std::size_t i = 0; i < w.rows.size(); ++i) {
      const auto& row = w.rows[i];
      const double raw_o = static_cast<double>(raw[i]);
      const double norm_o = static_cast<double>(raw[i] / mean);
      const double clip_o = std::clamp(norm_o, kClassWeightMin, kClassWeightMax);
      worst = std::max({worst, std::abs(row.raw - raw_o), std::abs(row.normalized - norm_o),
                        std::abs(row.clipped - clip_o)});
      c.expect(std::abs(row.raw - raw_o) <= 1e-9, "raw weight row " + std::to_string(i));
      c.expect(std::abs(row.normalized - norm_o) <= 1e-9, "normalized row " + std::to_string(i));
      c.expect(std::abs(row.clipped - clip_o) <= 1e-9, "clipped row " + std::to_string(i));
      c.expect(row.clipped >= 0.01 && row.clipped <= 5.0, "clipped out of range " + num(row.clipped));
      norm_mean += row.normalized;
    }
    norm_mean /= static_cast<double>(w.rows.size());
    c.expect(std::abs(norm_mean - 1.0) <= 1e-9, "normalized mean " + num(norm_mean));
  }
  return "50 tables, max deviation from oracle " + num(worst);
}

// 7. Determinism -------------------------------------------------------------

AugConfig fixture_config(const std::filesystem::path& json) {
  AugConfig cfg;
  cfg.target_size = {48, 64};
  cfg.mix.supervised = {json, json.parent_path()};
  return cfg;
}

std::string determinism(Check& c) {
  const auto t0 = Clock::now();
  const auto dir = cpt::temp_dir("acceptance_determinism");
  const auto json = cpt::write_synthetic(dir / "in", cpt::random_rect_images(8, 808));
  AugConfig cfg = fixture_config(json);
  cfg.seed = 12345;
  cfg.num_samples = 16;
  cfg.blend.enabled = true;
  cfg.workers = 1;
  run(cfg, dir / "w1");
  cfg.workers = 4;
  run(cfg, dir / "w4");
  const auto h1 = cpt::hash_tree(dir / "w1"), h4 = cpt::hash_tree(dir / "w4");
  c.expect(h1 == h4, "output trees differ");
  const double secs = seconds_since(t0);
  c.expect(secs < 30.0, "runtime " + num(secs) + " s");
  std::filesystem::remove_all(dir);
  return "16 samples from 8 images, 1 vs 4 workers, " + num(secs) + " s";
}

// 8. End to end --------------------------------------------------------------

/// Output pixels [a, b) of a resized axis whose nearest source pixel lies in
/// [lo, hi): floor((2f + 1) * n / (2 * m)) >= v  <=>  f >= ceil((2mv - n) / 2n).
std::pair<std::int64_t, std::int64_t> nearest_interval(std::int64_t lo, std::int64_t hi, std::int64_t n,
                                                       std::int64_t m) {
  auto first_at_least = [&](std::int64_t v) {
    const std::int64_t num = 2 * m * v - n, den = 2 * n;
    std::int64_t f = num >= 0 ? (num + den - 1) / den : -((-num) / den);
    return std::clamp<std::int64_t>(f, 0, m);
  };
  return {first_at_least(lo), first_at_least(hi)};
}

/// Whether a source rectangle keeps at least one pixel on the canvas.
bool rect_survives(const cpt::RectInstance& r, const TransformParams& p) {
  auto axis = [&](int lo, int len, int src, int scaled, bool flip, int crop, int place, int canvas) {
    auto [a, b] = nearest_interval(lo, lo + len, src, scaled);
    if (flip) std::tie(a, b) = std::pair{scaled - b, scaled - a};
    a += place - crop;
    b += place - crop;
    return std::max<std::int64_t>(a, 0) < std::min<std::int64_t>(b, canvas);
  };
  return axis(r.x, r.w, p.source.width, p.scaled.width, p.flip, p.crop_x, p.place_x, p.target.width) &&
         axis(r.y, r.h, p.source.height, p.scaled.height, false, p.crop_y, p.place_y, p.target.height);
}

TransformParams params_from_json(const Json& j, Size2 source, Size2 target) {
  TransformParams p;
  p.source = source;
  p.target = target;
  p.scale = j["scale"];
  p.flip = j["flip"];
  p.scaled = {j["scaled_size"][0], j["scaled_size"][1]};
  p.crop_x = j["crop_offset"][0];
  p.crop_y = j["crop_offset"][1];
  p.place_x = j["place_offset"][0];
  p.place_y = j["place_offset"][1];
  return p;
}

std::string end_to_end(Check& c) {
  const auto dir = cpt::temp_dir("acceptance_e2e");
  auto spec = cpt::random_rect_images(4, 4444);
  spec[2].instances.push_back({2, 2, 10, 8, 1, true});  // crowd region, never pasted
  const auto json = cpt::write_synthetic(dir / "in", spec);
  AugConfig cfg = fixture_config(json);
  cfg.seed = 99;
  cfg.paste_policy = PastePolicy::all_objects();
  cfg.main_jitter = cfg.pasted_jitter = JitterMode::lsj();
  cfg.num_samples = 40;
  const RunStats stats = run(cfg, dir / "out");

  const Dataset out = load_dataset(dir / "out" / "annotations.json", dir / "out");
  c.expect(static_cast<std::int64_t>(out.images().size()) == 40, "image count");

  std::int64_t expected_pasted = 0, actual_pasted = 0;
  for (const auto& img : out.images()) {
    const auto file = dir / "out" / img.file_name;
    c.expect(std::filesystem::exists(file), "missing " + img.file_name);
    const Image pixels = read_image(file);
    c.expect(pixels.height() == 48 && pixels.width() == 64, "canvas size of " + img.file_name);

    const auto& prov = img.extra["copy_paste"];
    const auto src_id = prov["source_image_id"].get<std::int64_t>();
    const auto& s = spec[static_cast<std::size_t>(src_id - 1)];
    const auto p = params_from_json(prov["source_transform"], {s.height, s.width}, {48, 64});
    std::int64_t expect_here = 0;
    for (const auto& r : s.instances) expect_here += (!r.crowd && rect_survives(r, p)) ? 1 : 0;
    expected_pasted += expect_here;

    std::int64_t pasted_here = 0;
    for (auto pos : out.annotations_of(img.id)) {
      const auto& a = out.annotations()[pos];
      const std::string tag = "annotation " + std::to_string(a.id);
      const Bitmap m = to_bitmap(a.segmentation, img.height, img.width);
      const auto area = mask_area(m);
      c.expect(area >= 1, tag + ": empty mask");
      c.expect(a.area == static_cast<double>(area), tag + ": area");
      c.expect(a.bbox == tight_bbox(m) && shrink_by_one_loses_pixel(m, a.bbox), tag + ": bbox");
      c.expect(out.category(a.category_id) != nullptr, tag + ": category");
      if (a.extra["copy_paste"]["origin"] == "pasted") {
        ++pasted_here;
        c.expect(!a.iscrowd, tag + ": pasted crowd region");
      }
    }
    c.expect(pasted_here == expect_here, img.file_name + ": pasted " + std::to_string(pasted_here) +
                                             ", expected " + std::to_string(expect_here));
    actual_pasted += pasted_here;
  }
  c.expect(stats.instances_pasted == expected_pasted, "run stats pasted count");
  std::filesystem::remove_all(dir);
  return "40 samples, pasted " + std::to_string(actual_pasted) + ", expected " + std::to_string(expected_pasted);
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<std::string(Check&)> fn;
  };
  const std::vector<Criterion> criteria{
      {"rle-codec", rle_codec},
      {"blend-partition", blend_partition},
      {"annotation-update", annotation_update},
      {"jitter-ranges", jitter_ranges},
      {"repeat-factor-sampling", rfs},
      {"class-balanced-weights", class_weights},
      {"determinism-parallelism", determinism},
      {"end-to-end-fixture", end_to_end},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    std::string detail;
    try {
      detail = cr.fn(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    failed += check.ok() ? 0 : 1;
    std::printf("%s %s: %s%s\n", check.ok() ? "PASS" : "FAIL", cr.name, detail.c_str(), check.summary().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
