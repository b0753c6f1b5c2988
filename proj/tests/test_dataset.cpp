#include <doctest.h>

#include <fstream>

#include "copypaste/dataset.hpp"
#include "copypaste/error.hpp"
#include "support/fixtures.hpp"

using namespace copypaste;

namespace {

Json minimal_doc() {
  return Json::parse(R"({"images":[{"id":1,"file_name":"x.png","width":4,"height":3}],
                         "annotations":[],"categories":[{"id":1,"name":"a"}]})");
}

std::filesystem::path fixture(const char* name) { return std::filesystem::path(COPYPASTE_FIXTURE_DIR) / name; }

void check_equivalent(const Dataset& a, const Dataset& b) {
  REQUIRE(a.images().size() == b.images().size());
  REQUIRE(a.annotations().size() == b.annotations().size());
  REQUIRE(a.categories().size() == b.categories().size());
  for (std::size_t i = 0; i < a.images().size(); ++i) {
    CHECK(a.images()[i].id == b.images()[i].id);
    CHECK(a.images()[i].file_name == b.images()[i].file_name);
    CHECK(a.images()[i].extra == b.images()[i].extra);
  }
  for (std::size_t i = 0; i < a.annotations().size(); ++i) {
    const auto& x = a.annotations()[i];
    const auto& y = b.annotations()[i];
    CHECK(x.id == y.id);
    CHECK(x.category_id == y.category_id);
    CHECK(x.iscrowd == y.iscrowd);
    CHECK(x.area == doctest::Approx(y.area).epsilon(1e-6));
    for (int k = 0; k < 4; ++k) CHECK(x.bbox[k] == doctest::Approx(y.bbox[k]).epsilon(1e-6));
    const auto& img = a.image(x.image_id);
    CHECK(to_bitmap(x.segmentation, img.height, img.width) == to_bitmap(y.segmentation, img.height, img.width));
    CHECK(x.extra == y.extra);
  }
  CHECK(a.extra() == b.extra());
}

}  // namespace

TEST_CASE("minimal dataset with no annotations") {
  const Dataset d = parse_dataset(minimal_doc());
  CHECK(d.images().size() == 1);
  CHECK(d.annotations_of(1).empty());
  CHECK(d.annotations_of(42).empty());
}

TEST_CASE("dangling references name the annotation") {
  Json doc = minimal_doc();
  doc["annotations"].push_back({{"id", 77}, {"image_id", 9}, {"category_id", 1}, {"segmentation", Json::array()}});
  try {
    parse_dataset(doc);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("annotation 77") != std::string::npos);
    CHECK(std::string(e.what()).find("image_id 9") != std::string::npos);
  }
  Json doc2 = minimal_doc();
  doc2["annotations"].push_back({{"id", 78}, {"image_id", 1}, {"category_id", 5}, {"segmentation", Json::array()}});
  CHECK_THROWS_WITH_AS(parse_dataset(doc2), doctest::Contains("annotation 78"), FormatError);
}

TEST_CASE("malformed JSON is a FormatError") {
  const auto dir = copypaste::testing::temp_dir("malformed");
  std::ofstream(dir / "bad.json") << "{\"images\": [";
  CHECK_THROWS_AS(load_dataset(dir / "bad.json", dir), FormatError);
  CHECK_THROWS_AS(load_dataset(dir / "missing.json", dir), IoError);
}

TEST_CASE("polygon and RLE segmentations parse into their variants") {
  const Dataset d = load_dataset(fixture("mixed_segmentation.json"), fixture(""));
  REQUIRE(d.annotations().size() == 3);
  CHECK(std::holds_alternative<PolygonSet>(d.annotations()[0].segmentation));
  CHECK(std::holds_alternative<Rle>(d.annotations()[1].segmentation));
  CHECK(std::holds_alternative<Rle>(d.annotations()[2].segmentation));
  CHECK(d.annotations()[2].iscrowd);
  // Areas and boxes reported by the reference COCO API.
  const auto& expected = d.extra()["expected"];
  for (std::size_t i = 1; i < 3; ++i) {
    const auto& a = d.annotations()[i];
    const auto& e = expected[std::to_string(a.id)];
    const Bitmap b = to_bitmap(a.segmentation, 20, 30);
    CHECK(mask_area(b) == e["area"].get<std::int64_t>());
    const auto box = e["bbox"].get<std::vector<double>>();
    CHECK(tight_bbox(b) == BBox{box[0], box[1], box[2], box[3]});
  }
  CHECK(compress_rle(std::get<Rle>(d.annotations()[2].segmentation)) ==
        expected["12"]["compressed"].get<std::string>());
  // The polygon covers x in [1, 9), y in [1, 7) under the center rule.
  CHECK(mask_area(to_bitmap(d.annotations()[0].segmentation, 20, 30)) == 48);
  CHECK(d.annotations()[2].extra["note"] == "crowd");
  CHECK(d.categories()[0].extra["supercategory"] == "human");
}

TEST_CASE("load, write, load round trip keeps the dataset") {
  const auto dir = copypaste::testing::temp_dir("roundtrip");
  const Dataset a = load_dataset(fixture("mixed_segmentation.json"), fixture(""));
  write_dataset(a, dir / "out.json");
  const Dataset b = load_dataset(dir / "out.json", dir);
  check_equivalent(a, b);
  write_dataset(b, dir / "out2.json");
  std::ifstream f1(dir / "out.json"), f2(dir / "out2.json");
  const std::string s1((std::istreambuf_iterator<char>(f1)), {}), s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);
}

TEST_CASE("bitmap segmentations are emitted as compressed RLE dicts") {
  Bitmap b(3, 4);
  b.set(1, 1, true);
  InstanceAnnotation a;
  a.id = 1;
  a.image_id = 1;
  a.category_id = 1;
  a.segmentation = b;
  normalize_geometry(a);
  CHECK(a.area == 1.0);
  CHECK(a.bbox == BBox{1, 1, 1, 1});
  const Dataset d({{1, "x.png", 4, 3, Json::object()}}, {a}, {{1, "a", Json::object()}});
  const Json j = dataset_to_json(d);
  const auto& seg = j["annotations"][0]["segmentation"];
  REQUIRE(seg.is_object());
  CHECK(seg["size"] == Json::array({3, 4}));
  CHECK(seg["counts"].is_string());
  CHECK(seg["counts"].get<std::string>() == compress_rle(bitmap_to_rle(b)));
}

TEST_CASE("duplicate ids are rejected") {
  Json doc = minimal_doc();
  doc["images"].push_back({{"id", 1}, {"file_name", "y.png"}, {"width", 2}, {"height", 2}});
  CHECK_THROWS_AS(parse_dataset(doc), FormatError);
}

TEST_CASE("non-positive image size is rejected") {
  Json doc = minimal_doc();
  doc["images"][0]["width"] = 0;
  CHECK_THROWS_AS(parse_dataset(doc), FormatError);
}

TEST_CASE("1k-image synthetic dataset for the reference-tooling cross-check") {
  // tests/scripts/check_coco_json.py reads this file in a separate ctest.
  Rng rng(1234);
  std::vector<ImageRecord> images;
  std::vector<InstanceAnnotation> anns;
  std::int64_t next_id = 1;
  for (int i = 1; i <= 1000; ++i) {
    const int h = 8 + static_cast<int>(rng.below(40)), w = 8 + static_cast<int>(rng.below(40));
    images.push_back({i, "img_" + std::to_string(i) + ".png", w, h, Json::object()});
    const int n = static_cast<int>(rng.below(4));
    for (int k = 0; k < n; ++k) {
      Bitmap b = copypaste::testing::random_bitmap(rng, h, w, rng.uniform() * 0.3);
      if (mask_area(b) == 0) continue;
      InstanceAnnotation a;
      a.id = next_id++;
      a.image_id = i;
      a.category_id = 1 + static_cast<std::int64_t>(rng.below(2));
      a.segmentation = std::move(b);
      normalize_geometry(a);
      anns.push_back(std::move(a));
    }
  }
  const Dataset d(std::move(images), std::move(anns), {{1, "a", Json::object()}, {2, "b", Json::object()}});
  const auto path = std::filesystem::path(COPYPASTE_BUILD_DIR) / "coco1k.json";
  write_dataset(d, path);
  const Dataset back = load_dataset(path, COPYPASTE_BUILD_DIR);
  CHECK(back.images().size() == 1000);
  CHECK(back.annotations().size() == d.annotations().size());
}
