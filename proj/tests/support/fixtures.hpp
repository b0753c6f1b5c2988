#pragma once

// Synthetic COCO datasets for tests: solid-color backgrounds with
// axis-aligned rectangular instances, so geometry has closed-form answers.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "copypaste/dataset.hpp"
#include "copypaste/image.hpp"
#include "copypaste/rng.hpp"

namespace copypaste::testing {

struct RectInstance {
  int x = 0, y = 0, w = 0, h = 0;  // pixels, inside the image
  std::int64_t category_id = 1;
  bool crowd = false;
};

struct SyntheticImage {
  int width = 64;
  int height = 48;
  std::vector<RectInstance> instances;
};

/// A fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("copypaste_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Writes img_<i>.png files plus annotations.json into `dir`. Instances are
/// stored as rectangle polygons, except every third one as compressed RLE.
inline std::filesystem::path write_synthetic(const std::filesystem::path& dir, const std::vector<SyntheticImage>& spec,
                                             int num_categories = 3, std::uint64_t seed = 1) {
  std::filesystem::create_directories(dir);
  Rng rng(seed);
  std::vector<ImageRecord> images;
  std::vector<InstanceAnnotation> anns;
  std::vector<CategoryRecord> cats;
  for (int c = 1; c <= num_categories; ++c) cats.push_back({c, "cat" + std::to_string(c), Json::object()});
  std::int64_t ann_id = 100;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto& s = spec[i];
    const auto id = static_cast<std::int64_t>(i + 1);
    Image img(s.height, s.width, {static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                                  static_cast<std::uint8_t>(rng.below(256))});
    // Per-pixel noise so resampling has something to do.
    for (auto& v : img.data()) v = static_cast<std::uint8_t>((v + rng.below(16)) & 0xff);
    int k = 0;
    for (const auto& r : s.instances) {
      const Rgb color{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                      static_cast<std::uint8_t>(rng.below(256))};
      for (int y = r.y; y < r.y + r.h; ++y) {
        for (int x = r.x; x < r.x + r.w; ++x) std::copy(color.begin(), color.end(), img.pixel(x, y));
      }
      InstanceAnnotation a;
      a.id = ann_id++;
      a.image_id = id;
      a.category_id = r.category_id;
      a.bbox = {double(r.x), double(r.y), double(r.w), double(r.h)};
      a.area = double(r.w) * r.h;
      a.iscrowd = r.crowd;
      if (k++ % 3 == 2) {
        Bitmap bm(s.height, s.width);
        for (int y = r.y; y < r.y + r.h; ++y)
          for (int x = r.x; x < r.x + r.w; ++x) bm.set(x, y, true);
        a.segmentation = bitmap_to_rle(bm);
      } else {
        const double x0 = r.x, y0 = r.y, x1 = r.x + r.w, y1 = r.y + r.h;
        a.segmentation = PolygonSet{{{x0, y0, x1, y0, x1, y1, x0, y1}}};
      }
      anns.push_back(std::move(a));
    }
    const std::string name = "img_" + std::to_string(i + 1) + ".png";
    write_png(dir / name, img);
    images.push_back({id, name, s.width, s.height, Json::object()});
  }
  const Dataset d(std::move(images), std::move(anns), std::move(cats));
  const auto path = dir / "annotations.json";
  write_dataset(d, path);
  return path;
}

/// n images of 64x48 with 1..4 random rectangles each.
inline std::vector<SyntheticImage> random_rect_images(int n, std::uint64_t seed, int width = 64, int height = 48) {
  Rng rng(seed);
  std::vector<SyntheticImage> out;
  for (int i = 0; i < n; ++i) {
    SyntheticImage s{width, height, {}};
    const int count = 1 + static_cast<int>(rng.below(4));
    for (int j = 0; j < count; ++j) {
      RectInstance r;
      r.w = 4 + static_cast<int>(rng.below(width / 2));
      r.h = 4 + static_cast<int>(rng.below(height / 2));
      r.x = static_cast<int>(rng.below(width - r.w + 1));
      r.y = static_cast<int>(rng.below(height - r.h + 1));
      r.category_id = 1 + static_cast<std::int64_t>(rng.below(3));
      s.instances.push_back(r);
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline Bitmap random_bitmap(Rng& rng, int h, int w, double density) {
  Bitmap b(h, w);
  for (auto& v : b.data()) v = rng.uniform() < density ? 1 : 0;
  return b;
}

/// FNV-1a over every regular file (relative path + bytes), in path order.
std::uint64_t hash_tree(const std::filesystem::path& dir);

}  // namespace copypaste::testing
