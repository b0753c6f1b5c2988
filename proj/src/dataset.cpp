#include "copypaste/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "copypaste/error.hpp"

namespace copypaste {

namespace {

const std::vector<std::size_t> kNoAnnotations;

Json extra_keys(const Json& obj, std::initializer_list<const char*> known) {
  Json extra = Json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool modeled = false;
    for (const char* k : known) modeled = modeled || it.key() == k;
    if (!modeled) extra[it.key()] = it.value();
  }
  return extra;
}

template <typename T>
T required(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(where + ": missing key '" + key + "'");
  try {
    return it->get<T>();
  } catch (const Json::exception& e) {
    throw FormatError(where + ": bad value for '" + key + "': " + e.what());
  }
}

void merge_extra(Json& out, const Json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it) out[it.key()] = it.value();
}

}  // namespace

void normalize_geometry(InstanceAnnotation& ann) {
  if (const auto* bm = std::get_if<Bitmap>(&ann.segmentation)) {
    ann.area = static_cast<double>(mask_area(*bm));
    ann.bbox = tight_bbox(*bm);
  }
}

Dataset::Dataset(std::vector<ImageRecord> images, std::vector<InstanceAnnotation> annotations,
                 std::vector<CategoryRecord> categories, Json extra)
    : images_(std::move(images)),
      annotations_(std::move(annotations)),
      categories_(std::move(categories)),
      extra_(std::move(extra)) {
  for (std::size_t i = 0; i < images_.size(); ++i) {
    const auto& img = images_[i];
    if (img.width < 1 || img.height < 1) {
      throw FormatError("image " + std::to_string(img.id) + " has non-positive size");
    }
    if (!image_pos_.emplace(img.id, i).second) {
      throw FormatError("duplicate image id " + std::to_string(img.id));
    }
  }
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (!category_pos_.emplace(categories_[i].id, i).second) {
      throw FormatError("duplicate category id " + std::to_string(categories_[i].id));
    }
  }
  by_image_.resize(images_.size());
  std::set<std::int64_t> ann_ids;
  for (std::size_t i = 0; i < annotations_.size(); ++i) {
    const auto& a = annotations_[i];
    const std::string who = "annotation " + std::to_string(a.id);
    if (!ann_ids.insert(a.id).second) throw FormatError("duplicate " + who);
    auto img = image_pos_.find(a.image_id);
    if (img == image_pos_.end()) {
      throw FormatError(who + " references missing image_id " + std::to_string(a.image_id));
    }
    if (!category_pos_.count(a.category_id)) {
      throw FormatError(who + " references missing category_id " + std::to_string(a.category_id));
    }
    by_image_[img->second].push_back(i);
  }
}

const std::vector<std::size_t>& Dataset::annotations_of(std::int64_t image_id) const {
  auto it = image_pos_.find(image_id);
  return it == image_pos_.end() ? kNoAnnotations : by_image_[it->second];
}

const ImageRecord& Dataset::image(std::int64_t image_id) const {
  auto it = image_pos_.find(image_id);
  if (it == image_pos_.end()) throw FormatError("unknown image id " + std::to_string(image_id));
  return images_[it->second];
}

std::optional<std::size_t> Dataset::image_position(std::int64_t image_id) const {
  auto it = image_pos_.find(image_id);
  if (it == image_pos_.end()) return std::nullopt;
  return it->second;
}

const CategoryRecord* Dataset::category(std::int64_t category_id) const {
  auto it = category_pos_.find(category_id);
  return it == category_pos_.end() ? nullptr : &categories_[it->second];
}

SegMask segmentation_from_json(const Json& j, const ImageRecord& img) {
  if (j.is_null()) return PolygonSet{};
  if (j.is_array()) {
    PolygonSet p;
    for (const auto& poly : j) p.polygons.push_back(poly.get<std::vector<double>>());
    return p;
  }
  if (j.is_object()) {
    const auto size = j.at("size").get<std::vector<int>>();
    if (size.size() != 2) throw FormatError("RLE size must be [h, w]");
    const auto& counts = j.at("counts");
    if (counts.is_string()) return decompress_rle(counts.get<std::string>(), size[0], size[1]);
    Rle rle{size[0], size[1], counts.get<std::vector<std::uint32_t>>()};
    rle_to_bitmap(rle);  // validates the total
    return rle;
  }
  throw FormatError("segmentation for image " + std::to_string(img.id) + " is neither polygons nor RLE");
}

Json segmentation_to_json(const SegMask& seg) {
  if (const auto* poly = std::get_if<PolygonSet>(&seg)) {
    Json arr = Json::array();
    for (const auto& p : poly->polygons) arr.push_back(p);
    return arr;
  }
  const Rle rle = std::holds_alternative<Rle>(seg) ? std::get<Rle>(seg) : bitmap_to_rle(std::get<Bitmap>(seg));
  Json out = Json::object();
  out["size"] = {rle.height, rle.width};
  out["counts"] = compress_rle(rle);
  return out;
}

Dataset parse_dataset(const Json& doc) {
  if (!doc.is_object()) throw FormatError("dataset JSON must be an object");
  for (const char* key : {"images", "annotations", "categories"}) {
    if (!doc.contains(key) || !doc[key].is_array()) {
      throw FormatError(std::string("dataset JSON needs an array '") + key + "'");
    }
  }
  std::vector<ImageRecord> images;
  std::map<std::int64_t, std::size_t> image_pos;
  for (const auto& j : doc["images"]) {
    ImageRecord r;
    r.id = required<std::int64_t>(j, "id", "image");
    const std::string where = "image " + std::to_string(r.id);
    r.file_name = required<std::string>(j, "file_name", where);
    r.width = required<int>(j, "width", where);
    r.height = required<int>(j, "height", where);
    r.extra = extra_keys(j, {"id", "file_name", "width", "height"});
    image_pos.emplace(r.id, images.size());
    images.push_back(std::move(r));
  }
  std::vector<CategoryRecord> categories;
  for (const auto& j : doc["categories"]) {
    CategoryRecord c;
    c.id = required<std::int64_t>(j, "id", "category");
    c.name = required<std::string>(j, "name", "category " + std::to_string(c.id));
    c.extra = extra_keys(j, {"id", "name"});
    categories.push_back(std::move(c));
  }
  std::vector<InstanceAnnotation> annotations;
  for (const auto& j : doc["annotations"]) {
    InstanceAnnotation a;
    a.id = required<std::int64_t>(j, "id", "annotation");
    const std::string where = "annotation " + std::to_string(a.id);
    a.image_id = required<std::int64_t>(j, "image_id", where);
    a.category_id = required<std::int64_t>(j, "category_id", where);
    auto img = image_pos.find(a.image_id);
    if (img == image_pos.end()) {
      throw FormatError(where + " references missing image_id " + std::to_string(a.image_id));
    }
    if (j.contains("bbox")) {
      const auto b = j["bbox"].get<std::vector<double>>();
      if (b.size() != 4) throw FormatError(where + ": bbox must have 4 numbers");
      a.bbox = {b[0], b[1], b[2], b[3]};
    }
    if (j.contains("area")) a.area = j["area"].get<double>();
    if (j.contains("iscrowd")) {
      a.iscrowd = j["iscrowd"].is_boolean() ? j["iscrowd"].get<bool>() : j["iscrowd"].get<int>() != 0;
    }
    if (j.contains("score") && j["score"].is_number()) a.score = j["score"].get<double>();
    try {
      a.segmentation = segmentation_from_json(j.contains("segmentation") ? j["segmentation"] : Json(),
                                              images[img->second]);
    } catch (const Json::exception& e) {
      throw FormatError(where + ": bad segmentation: " + e.what());
    } catch (const Error& e) {
      throw FormatError(where + ": " + e.what());
    }
    a.extra = extra_keys(j, {"id", "image_id", "category_id", "bbox", "area", "segmentation", "iscrowd", "score"});
    annotations.push_back(std::move(a));
  }
  Json extra = extra_keys(doc, {"images", "annotations", "categories"});
  return Dataset(std::move(images), std::move(annotations), std::move(categories), std::move(extra));
}

Dataset load_dataset(const std::filesystem::path& json_path, const std::filesystem::path& image_root) {
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot open dataset file " + json_path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(json_path.string() + ": malformed JSON: " + e.what());
  }
  Dataset d = parse_dataset(doc);
  d.set_image_root(image_root);
  return d;
}

Json dataset_to_json(const Dataset& d) {
  Json doc = Json::object();
  merge_extra(doc, d.extra());
  Json images = Json::array();
  for (const auto& img : d.images()) {
    Json j = Json::object();
    j["id"] = img.id;
    j["file_name"] = img.file_name;
    j["width"] = img.width;
    j["height"] = img.height;
    merge_extra(j, img.extra);
    images.push_back(std::move(j));
  }
  Json anns = Json::array();
  for (const auto& a : d.annotations()) {
    Json j = Json::object();
    j["id"] = a.id;
    j["image_id"] = a.image_id;
    j["category_id"] = a.category_id;
    j["bbox"] = {a.bbox[0], a.bbox[1], a.bbox[2], a.bbox[3]};
    j["area"] = a.area;
    j["segmentation"] = segmentation_to_json(a.segmentation);
    j["iscrowd"] = a.iscrowd ? 1 : 0;
    if (a.score) j["score"] = *a.score;
    merge_extra(j, a.extra);
    anns.push_back(std::move(j));
  }
  Json cats = Json::array();
  for (const auto& c : d.categories()) {
    Json j = Json::object();
    j["id"] = c.id;
    j["name"] = c.name;
    merge_extra(j, c.extra);
    cats.push_back(std::move(j));
  }
  doc["images"] = std::move(images);
  doc["annotations"] = std::move(anns);
  doc["categories"] = std::move(cats);
  return doc;
}

void write_dataset(const Dataset& d, const std::filesystem::path& json_path,
                   const std::function<void(const ImageRecord&)>& image_writer) {
  if (image_writer) {
    for (const auto& img : d.images()) image_writer(img);
  }
  const std::string text = dataset_to_json(d).dump();
  std::ofstream out(json_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + json_path.string());
  out << text << '\n';
  if (!out.flush()) throw IoError("write failed for " + json_path.string());
}

}  // namespace copypaste
