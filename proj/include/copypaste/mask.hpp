#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace copypaste {

/// Dense binary mask, row-major, one byte per pixel holding 0 or 1.
class Bitmap {
 public:
  Bitmap() = default;
  Bitmap(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty_shape() const { return height_ == 0 || width_ == 0; }

  std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  void set(int x, int y, bool on) { data_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0; }

  std::vector<std::uint8_t>& data() { return data_; }
  const std::vector<std::uint8_t>& data() const { return data_; }

  bool same_shape(const Bitmap& o) const { return height_ == o.height_ && width_ == o.width_; }
  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Uncompressed COCO run-length encoding. Runs are taken in column-major
/// order and alternate background/foreground, starting with background
/// (so a mask whose first pixel is set starts with a zero run).
struct Rle {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  friend bool operator==(const Rle&, const Rle&) = default;
};

/// Flat [x0, y0, x1, y1, ...] pixel coordinate lists, one per polygon.
struct PolygonSet {
  std::vector<std::vector<double>> polygons;

  friend bool operator==(const PolygonSet&, const PolygonSet&) = default;
};

using SegMask = std::variant<PolygonSet, Rle, Bitmap>;

/// (x, y, w, h) in pixels. {0,0,0,0} is the empty-box sentinel.
using BBox = std::array<double, 4>;
inline constexpr BBox kEmptyBox{0.0, 0.0, 0.0, 0.0};

/// Pixel centers inside the union of the polygons (even-odd rule per
/// polygon) become foreground. Vertices may lie outside the frame.
/// Throws FormatError for a polygon with fewer than three vertices.
Bitmap polygons_to_bitmap(const PolygonSet& polygons, int height, int width);

Rle bitmap_to_rle(const Bitmap& bitmap);
/// Throws FormatError unless counts sum to height * width.
Bitmap rle_to_bitmap(const Rle& rle);

/// COCO's compact "counts" string.
std::string compress_rle(const Rle& rle);
/// Throws FormatError on characters outside '0'..'o', a truncated
/// continuation, negative runs, or counts not summing to height * width.
Rle decompress_rle(std::string_view counts, int height, int width);

/// Any representation to a dense mask of the given frame size.
Bitmap to_bitmap(const SegMask& mask, int height, int width);

std::int64_t mask_area(const Bitmap& bitmap);
BBox tight_bbox(const Bitmap& bitmap);

/// Area and box without materializing a Bitmap.
std::int64_t rle_area(const Rle& rle);

}  // namespace copypaste
