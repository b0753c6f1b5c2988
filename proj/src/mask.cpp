#include "copypaste/mask.hpp"

#include <algorithm>
#include <cmath>

#include "copypaste/error.hpp"

namespace copypaste {

Bitmap::Bitmap(int height, int width)
    : height_(height), width_(width), data_(static_cast<std::size_t>(height) * width, 0) {
  if (height < 0 || width < 0) throw ShapeError("negative bitmap dimensions");
}

namespace {

int clamp_index(double v, int lo, int hi) {
  if (!(v >= lo)) return lo;  // also catches NaN
  if (v > hi) return hi;
  return static_cast<int>(v);
}

}  // namespace

Bitmap polygons_to_bitmap(const PolygonSet& polygons, int height, int width) {
  Bitmap out(height, width);
  std::vector<double> crossings;
  for (const auto& poly : polygons.polygons) {
    if (poly.size() < 6 || poly.size() % 2 != 0) {
      throw FormatError("polygon needs at least 3 vertices, got " + std::to_string(poly.size()) +
                        " coordinates");
    }
    const std::size_t n = poly.size() / 2;
    double min_y = poly[1];
    double max_y = poly[1];
    for (std::size_t i = 1; i < n; ++i) {
      min_y = std::min(min_y, poly[2 * i + 1]);
      max_y = std::max(max_y, poly[2 * i + 1]);
    }
    const int row_lo = clamp_index(std::floor(min_y - 0.5), 0, height);
    const int row_hi = clamp_index(std::ceil(max_y - 0.5), -1, height - 1);
    for (int y = row_lo; y <= row_hi; ++y) {
      const double yc = y + 0.5;
      crossings.clear();
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double xi = poly[2 * i], yi = poly[2 * i + 1];
        const double xj = poly[2 * j], yj = poly[2 * j + 1];
        if ((yi > yc) != (yj > yc)) {
          crossings.push_back((xj - xi) * (yc - yi) / (yj - yi) + xi);
        }
      }
      std::sort(crossings.begin(), crossings.end());
      // A center xc is inside iff an odd number of crossings lie strictly to
      // its right, i.e. xc in [c[2k], c[2k+1]).
      for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
        const int x_lo = clamp_index(std::ceil(crossings[k] - 0.5), 0, width);
        const int x_hi = clamp_index(std::ceil(crossings[k + 1] - 0.5), 0, width);
        for (int x = x_lo; x < x_hi; ++x) out.set(x, y, true);
      }
    }
  }
  return out;
}

Rle bitmap_to_rle(const Bitmap& bitmap) {
  Rle rle{bitmap.height(), bitmap.width(), {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int x = 0; x < bitmap.width(); ++x) {
    for (int y = 0; y < bitmap.height(); ++y) {
      const std::uint8_t v = bitmap.at(x, y) ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

namespace {

void check_rle_total(const Rle& rle) {
  std::uint64_t total = 0;
  for (auto c : rle.counts) total += c;
  const auto expected = static_cast<std::uint64_t>(rle.height) * static_cast<std::uint64_t>(rle.width);
  if (rle.height < 0 || rle.width < 0 || total != expected) {
    throw FormatError("RLE counts sum to " + std::to_string(total) + " but size is " +
                      std::to_string(rle.height) + "x" + std::to_string(rle.width));
  }
}

}  // namespace

Bitmap rle_to_bitmap(const Rle& rle) {
  check_rle_total(rle);
  Bitmap out(rle.height, rle.width);
  const std::size_t h = static_cast<std::size_t>(rle.height);
  std::size_t pos = 0;  // column-major linear index
  bool on = false;
  for (auto c : rle.counts) {
    if (on) {
      for (std::size_t i = pos; i < pos + c; ++i) {
        out.set(static_cast<int>(i / h), static_cast<int>(i % h), true);
      }
    }
    pos += c;
    on = !on;
  }
  return out;
}

std::string compress_rle(const Rle& rle) {
  std::string s;
  const auto& cnts = rle.counts;
  for (std::size_t i = 0; i < cnts.size(); ++i) {
    long long x = cnts[i];
    if (i > 2) x -= static_cast<long long>(cnts[i - 2]);
    bool more = true;
    while (more) {
      long long c = x & 0x1f;
      x >>= 5;  // arithmetic shift keeps the sign
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      s.push_back(static_cast<char>(c + 48));
    }
  }
  return s;
}

Rle decompress_rle(std::string_view counts, int height, int width) {
  Rle rle{height, width, {}};
  std::size_t p = 0;
  std::vector<long long> values;
  while (p < counts.size()) {
    long long x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= counts.size()) throw FormatError("RLE string ends inside a continuation sequence");
      const int ch = static_cast<unsigned char>(counts[p]);
      if (ch < 48 || ch > 111) {
        throw FormatError("RLE string has character code " + std::to_string(ch) + " at offset " +
                          std::to_string(p) + " outside 48..111");
      }
      if (k >= 12) throw FormatError("RLE run value overflows 60 bits");
      const long long c = ch - 48;
      x |= (c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= -1LL << (5 * k);
    }
    if (values.size() > 2) x += values[values.size() - 2];
    if (x < 0 || x > 0xffffffffLL) {
      throw FormatError("RLE string decodes to invalid run " + std::to_string(x));
    }
    values.push_back(x);
  }
  rle.counts.reserve(values.size());
  for (auto v : values) rle.counts.push_back(static_cast<std::uint32_t>(v));
  check_rle_total(rle);
  return rle;
}

Bitmap to_bitmap(const SegMask& mask, int height, int width) {
  if (const auto* poly = std::get_if<PolygonSet>(&mask)) return polygons_to_bitmap(*poly, height, width);
  if (const auto* rle = std::get_if<Rle>(&mask)) {
    if (rle->height != height || rle->width != width) {
      throw ShapeError("RLE size " + std::to_string(rle->height) + "x" + std::to_string(rle->width) +
                       " does not match image " + std::to_string(height) + "x" + std::to_string(width));
    }
    return rle_to_bitmap(*rle);
  }
  const auto& bm = std::get<Bitmap>(mask);
  if (bm.height() != height || bm.width() != width) throw ShapeError("bitmap does not match image size");
  return bm;
}

std::int64_t mask_area(const Bitmap& bitmap) {
  std::int64_t n = 0;
  for (auto v : bitmap.data()) n += v ? 1 : 0;
  return n;
}

BBox tight_bbox(const Bitmap& bitmap) {
  int x0 = bitmap.width(), y0 = bitmap.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < bitmap.height(); ++y) {
    const std::uint8_t* row = bitmap.data().data() + static_cast<std::size_t>(y) * bitmap.width();
    for (int x = 0; x < bitmap.width(); ++x) {
      if (row[x]) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = y;
      }
    }
  }
  if (x1 < 0) return kEmptyBox;
  return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1 - x0 + 1),
          static_cast<double>(y1 - y0 + 1)};
}

std::int64_t rle_area(const Rle& rle) {
  std::int64_t n = 0;
  for (std::size_t i = 1; i < rle.counts.size(); i += 2) n += rle.counts[i];
  return n;
}

}  // namespace copypaste
