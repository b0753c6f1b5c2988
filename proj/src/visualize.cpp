#include "copypaste/visualize.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "copypaste/rng.hpp"

namespace copypaste {

namespace {

// 3x5 digit glyphs, one row per entry, bit 2 is the leftmost column.
constexpr std::uint8_t kDigits[10][5] = {
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
};

void put(Image& img, int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
  std::copy(c.begin(), c.end(), img.pixel(x, y));
}

void draw_label(Image& img, int x, int y, std::int64_t value, Rgb c) {
  const std::string text = std::to_string(value);
  for (char ch : text) {
    if (ch >= '0' && ch <= '9') {
      const auto& glyph = kDigits[ch - '0'];
      for (int gy = 0; gy < 5; ++gy) {
        for (int gx = 0; gx < 3; ++gx) {
          if (glyph[gy] & (4 >> gx)) put(img, x + gx, y + gy, c);
        }
      }
    } else {  // minus sign
      for (int gx = 0; gx < 3; ++gx) put(img, x + gx, y + 2, c);
    }
    x += 4;
  }
}

}  // namespace

Rgb category_color(std::int64_t category_id) {
  const std::uint64_t h = splitmix64(static_cast<std::uint64_t>(category_id) ^ 0x5bd1e995ULL);
  // Keep channels away from black so tints stay visible.
  return {static_cast<std::uint8_t>(64 + (h & 0xbf)), static_cast<std::uint8_t>(64 + ((h >> 8) & 0xbf)),
          static_cast<std::uint8_t>(64 + ((h >> 16) & 0xbf))};
}

bool is_pasted(const InstanceAnnotation& ann) {
  auto it = ann.extra.find("copy_paste");
  if (it == ann.extra.end() || !it->is_object()) return false;
  auto origin = it->find("origin");
  return origin != it->end() && origin->is_string() && origin->get<std::string>() == "pasted";
}

Image render_overlay(const Image& image, std::span<const InstanceAnnotation> annotations) {
  Image out = image;
  std::vector<const InstanceAnnotation*> order;
  for (const auto& a : annotations) order.push_back(&a);
  std::stable_partition(order.begin(), order.end(), [](const auto* a) { return !is_pasted(*a); });

  for (const auto* ann : order) {
    const Rgb color = category_color(ann->category_id);
    const Bitmap mask = to_bitmap(ann->segmentation, image.height(), image.width());
    for (int y = 0; y < mask.height(); ++y) {
      for (int x = 0; x < mask.width(); ++x) {
        if (!mask.at(x, y)) continue;
        std::uint8_t* p = out.pixel(x, y);
        for (int c = 0; c < 3; ++c) p[c] = static_cast<std::uint8_t>(std::round(0.5 * color[c] + 0.5 * p[c]));
      }
    }
    const BBox box = tight_bbox(mask);
    if (box[2] <= 0 || box[3] <= 0) continue;
    const int x0 = static_cast<int>(box[0]), y0 = static_cast<int>(box[1]);
    const int x1 = x0 + static_cast<int>(box[2]) - 1, y1 = y0 + static_cast<int>(box[3]) - 1;
    for (int x = x0; x <= x1; ++x) {
      put(out, x, y0, color);
      put(out, x, y1, color);
    }
    for (int y = y0; y <= y1; ++y) {
      put(out, x0, y, color);
      put(out, x1, y, color);
    }
    draw_label(out, x0, y0 >= 6 ? y0 - 6 : y1 + 2, ann->category_id, color);
  }
  return out;
}

}  // namespace copypaste
