#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "copypaste/mask.hpp"

namespace copypaste {

using Json = nlohmann::ordered_json;

struct ImageRecord {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
  Json extra = Json::object();  // keys we do not model, kept for emission
};

struct CategoryRecord {
  std::int64_t id = 0;
  std::string name;
  Json extra = Json::object();
};

struct InstanceAnnotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  BBox bbox = kEmptyBox;
  double area = 0.0;
  SegMask segmentation;
  bool iscrowd = false;
  std::optional<double> score;  // pseudo-label confidence
  Json extra = Json::object();
};

/// Recomputes bbox and area from a Bitmap segmentation. No-op for other
/// representations.
void normalize_geometry(InstanceAnnotation& ann);

class Dataset {
 public:
  Dataset() = default;
  /// Builds the index and checks referential integrity. Throws FormatError
  /// naming the first offending annotation.
  Dataset(std::vector<ImageRecord> images, std::vector<InstanceAnnotation> annotations,
          std::vector<CategoryRecord> categories, Json extra = Json::object());

  const std::vector<ImageRecord>& images() const { return images_; }
  const std::vector<InstanceAnnotation>& annotations() const { return annotations_; }
  const std::vector<CategoryRecord>& categories() const { return categories_; }
  const Json& extra() const { return extra_; }

  /// Annotation positions (into annotations()) for an image, in file order.
  const std::vector<std::size_t>& annotations_of(std::int64_t image_id) const;
  const ImageRecord& image(std::int64_t image_id) const;
  std::optional<std::size_t> image_position(std::int64_t image_id) const;
  const CategoryRecord* category(std::int64_t category_id) const;

  /// Directory image file names are relative to.
  const std::filesystem::path& image_root() const { return image_root_; }
  void set_image_root(std::filesystem::path root) { image_root_ = std::move(root); }
  std::filesystem::path image_path(const ImageRecord& img) const { return image_root_ / img.file_name; }

 private:
  std::vector<ImageRecord> images_;
  std::vector<InstanceAnnotation> annotations_;
  std::vector<CategoryRecord> categories_;
  Json extra_ = Json::object();
  std::filesystem::path image_root_;
  std::map<std::int64_t, std::size_t> image_pos_;
  std::map<std::int64_t, std::size_t> category_pos_;
  std::vector<std::vector<std::size_t>> by_image_;  // parallel to images_
};

Dataset parse_dataset(const Json& doc);
/// Reads COCO-style JSON. Image files are not touched until accessed.
Dataset load_dataset(const std::filesystem::path& json_path, const std::filesystem::path& image_root);

Json segmentation_to_json(const SegMask& seg);
SegMask segmentation_from_json(const Json& j, const ImageRecord& img);
Json dataset_to_json(const Dataset& d);

/// Writes the JSON (Bitmap and Rle segmentations become compressed RLE).
/// `image_writer`, when set, is called once per image record.
void write_dataset(const Dataset& d, const std::filesystem::path& json_path,
                   const std::function<void(const ImageRecord&)>& image_writer = {});

}  // namespace copypaste
