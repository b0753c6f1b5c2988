#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace copypaste {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit interleaved RGB, row-major.
class Image {
 public:
  Image() = default;
  Image(int height, int width, Rgb fill = {0, 0, 0});

  int height() const { return height_; }
  int width() const { return width_; }

  std::uint8_t* pixel(int x, int y) { return &data_[(static_cast<std::size_t>(y) * width_ + x) * 3]; }
  const std::uint8_t* pixel(int x, int y) const {
    return &data_[(static_cast<std::size_t>(y) * width_ + x) * 3];
  }

  std::vector<std::uint8_t>& data() { return data_; }
  const std::vector<std::uint8_t>& data() const { return data_; }

  bool same_shape(const Image& o) const { return height_ == o.height_ && width_ == o.width_; }
  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Decodes PNG or JPEG (sniffed from the file header) into RGB. Gray and
/// alpha channels are converted. Throws IoError.
Image read_image(const std::filesystem::path& path);

/// Lossless PNG with fixed encoder settings so equal images give equal bytes.
std::vector<std::uint8_t> encode_png(const Image& image);
void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace copypaste
