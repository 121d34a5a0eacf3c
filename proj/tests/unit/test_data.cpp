#include <doctest.h>

#include <filesystem>
#include <random>

#include "hullscan/data/dataset_io.hpp"
#include "hullscan/data/patches.hpp"
#include "hullscan/data/scene.hpp"
#include "hullscan/raster/coverage.hpp"

using namespace hullscan;
using namespace hullscan::data;

namespace {

SceneSpec all_bt_square_spec() {
  SceneSpec s;
  s.rows = s.cols = 100;
  s.hull = {0.0, 1.0, 0.0, 1.0, 0.0, 0.0};
  s.bands = {0.0, 1.0};
  s.boundary_wave = 0.0;
  s.background = Background::plain;
  s.fixed_blobs.push_back({Defect::corrosion, FixedBlob::Shape::rectangle, 40, 30, 20, 20});
  return s;
}

ImageRecord blank_record(int rows, int cols) {
  ImageRecord r;
  r.id = "r";
  r.pixels = RgbImage(rows, cols);
  r.ship_mask = BinaryMask(rows, cols, true);
  r.defect_masks = MaskSet(rows, cols);
  return r;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("hullscan_test_" + name);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("generate_scene basics") {
  SUBCASE("no blobs gives empty defect masks") {
    SceneSpec s;
    const auto rec = generate_scene(s);
    for (const auto& m : rec.defect_masks->masks) CHECK_FALSE(m.any());
    CHECK(rec.ship_mask->any());
  }

  SUBCASE("pure function of the spec") {
    const auto spec = random_scene_spec(42);
    const auto a = generate_scene(spec), b = generate_scene(spec);
    CHECK(a.pixels == b.pixels);
    CHECK(*a.ship_mask == *b.ship_mask);
    CHECK(*a.boundaries == *b.boundaries);
    for (int k = 0; k < 3; ++k) CHECK(a.defect_masks->masks[k] == b.defect_masks->masks[k]);
  }

  SUBCASE("20x20 corrosion square on an all-BT hull reads 4.00%") {
    const auto g = generate_scene_with_placement(all_bt_square_spec());
    std::size_t hull = 0, bt = 0, rust = 0;
    for (int r = 0; r < 100; ++r)
      for (int c = 0; c < 100; ++c) {
        hull += g.record.ship_mask->test(r, c);
        const bool in_bt = g.placement.sections.at(r, c) == Section::bt;
        bt += in_bt;
        rust += in_bt && g.record.defect_masks->masks[0].test(r, c);
      }
    CHECK(hull == 10000);
    CHECK(bt == 10000);
    CHECK(rust == 400);
    const auto rep = coverage(g.placement.sections, *g.record.defect_masks);
    CHECK(rep.percent(Section::bt, Defect::corrosion) == doctest::Approx(100.0 * rust / bt));
    CHECK(rep.percent(Section::bt, Defect::corrosion) == doctest::Approx(4.0));
    CHECK_FALSE(rep[Section::ts].present);
    CHECK_FALSE(rep[Section::vs].present);
    CHECK(g.placement.percent(Section::bt, Defect::corrosion) == doctest::Approx(4.0));
  }

  SUBCASE("invalid spec names the field") {
    SceneSpec s;
    s.bands = {0.7, 0.5};
    CHECK_THROWS_AS(generate_scene(s), SceneSpecError);
    try {
      generate_scene(s);
    } catch (const SceneSpecError& e) {
      CHECK(e.field().find("bands") != std::string::npos);
    }
  }

  SUBCASE("records satisfy the record invariants") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) CHECK_NOTHROW(validate(generate_scene(random_scene_spec(seed))));
  }
}

TEST_CASE("corpus split and label dropout") {
  CorpusOptions opt;
  opt.rows = 96;
  opt.cols = 128;
  opt.label_dropout = 0.5;
  const auto corpus = generate_corpus(20, 3, opt);
  REQUIRE(corpus.size() == 20);
  int dropped_held_out = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto expect = i % 10 < 7 ? Split::train : (i % 10 == 7 ? Split::val : Split::test);
    CHECK(corpus[i].record.split == expect);
    if (expect != Split::train) dropped_held_out += corpus[i].placement.dropped_blob_count;
    for (int k = 0; k < 3; ++k) {
      // Human labels never claim more than the complete truth.
      const auto& human = corpus[i].record.defect_masks->masks[k];
      const auto& truth = corpus[i].placement.truth_masks.masks[k];
      CHECK(mask_intersection(human, truth) == human);
    }
  }
  CHECK(dropped_held_out == 0);
}

TEST_CASE("slice_seg_patches") {
  SUBCASE("no defects gives no patches") {
    CHECK(slice_seg_patches(blank_record(448, 448)).empty());
  }

  SUBCASE("one corroded tile of four") {
    auto r = blank_record(448, 448);
    for (int y = 224; y < 448; ++y)
      for (int x = 0; x < 224; ++x) r.defect_masks->masks[0].set(y, x);
    const auto ps = slice_seg_patches(r, 224, 0.01);
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].row == 224);
    CHECK(ps[0].col == 0);
    CHECK(ps[0].roi_ratio == doctest::Approx(1.0));
    REQUIRE(ps[0].masks);
    CHECK(ps[0].masks->masks[0].count() == 224u * 224u);
  }

  SUBCASE("fraction exactly at the threshold is kept") {
    auto r = blank_record(100, 100);
    for (int x = 0; x < 100; ++x) r.defect_masks->masks[2].set(0, x);  // 100 / 10000
    CHECK(slice_seg_patches(r, 100, 0.01).size() == 1);
    r.defect_masks->masks[2].set(0, 99, false);
    CHECK(slice_seg_patches(r, 100, 0.01).empty());
  }
}

TEST_CASE("select_cls_patches") {
  auto r = blank_record(64, 128);
  BinaryMask roi(64, 128);
  // Left tile: 5% RoI. Right tile: 20% RoI overlapping corrosion and fouling.
  int placed = 0;
  for (int y = 0; y < 64 && placed < 205; ++y)
    for (int x = 0; x < 64 && placed < 205; ++x, ++placed) roi.set(y, x);
  for (int y = 0; y < 64; ++y)
    for (int x = 64; x < 128; ++x)
      if ((y * 64 + (x - 64)) < 820) roi.set(y, x);
  r.defect_masks->masks[0].set(0, 64);   // corrosion
  r.defect_masks->masks[2].set(1, 70);   // fouling
  r.defect_masks->masks[1].set(60, 70);  // delamination outside the RoI

  const auto ps = select_cls_patches(r, roi, 64, 0.1);
  REQUIRE(ps.size() == 1);
  CHECK(ps[0].col == 64);
  CHECK(ps[0].roi_ratio == doctest::Approx(820.0 / 4096.0));
  CHECK(ps[0].labels == std::array<std::uint8_t, 3>{1, 1, 0});
  CHECK(ps[0].overlap == std::array<std::size_t, 3>{1, 1, 0});
}

TEST_CASE("tile_origins cover the image") {
  const auto o = tile_origins(480, 640, 224);
  CHECK(o.size() == 9);
  CHECK(o.back() == std::array<int, 2>{448, 448});
}

TEST_CASE("dataset layout round trip") {
  SUBCASE("empty directory") {
    TempDir d("empty");
    CHECK(build_manifest(d.path).entries.empty());
  }

  SUBCASE("records on disk") {
    TempDir d("records");
    for (int i = 0; i < 3; ++i) {
      auto rec = generate_scene(random_scene_spec(static_cast<std::uint64_t>(i) + 10, {96, 128}),
                                "rec_" + std::to_string(i));
      if (i == 2) {
        rec.ship_mask.reset();
        rec.boundaries.reset();
        rec.defect_masks.reset();
      }
      write_record(d.path, rec);
    }
    const auto m = build_manifest(d.path);
    REQUIRE(m.entries.size() == 3);
    const auto& bare = *std::find_if(m.entries.begin(), m.entries.end(), [](const auto& e) { return e.id == "rec_2"; });
    CHECK_FALSE(bare.has_ship());
    CHECK_FALSE(bare.has_boundaries());
    CHECK_FALSE(bare.has_defects());

    write_manifest(d.path, m);
    const auto back = read_manifest(d.path);
    REQUIRE(back.entries.size() == 3);
    const auto& e0 = *std::find_if(back.entries.begin(), back.entries.end(), [](const auto& e) { return e.id == "rec_0"; });
    const auto loaded = load_record(d.path, e0);
    const auto orig = generate_scene(random_scene_spec(10, {96, 128}), "rec_0");
    CHECK(loaded.pixels == orig.pixels);
    CHECK(*loaded.ship_mask == *orig.ship_mask);
    for (int k = 0; k < 3; ++k) CHECK(loaded.defect_masks->masks[k] == orig.defect_masks->masks[k]);
    for (int b = 0; b < 2; ++b)
      for (int j = 0; j < loaded.boundaries->width(); ++j) {
        CHECK(loaded.boundaries->valid[b][j] == orig.boundaries->valid[b][j]);
        if (orig.boundaries->valid[b][j]) CHECK(loaded.boundaries->y[b][j] == doctest::Approx(orig.boundaries->y[b][j]));
      }
  }

  SUBCASE("partial defect masks are rejected") {
    TempDir d("partial");
    auto rec = generate_scene(random_scene_spec(3, {96, 128}), "bad");
    write_record(d.path, rec);
    std::filesystem::path dir = d.path / "train" / "bad";
    bool removed = false;
    for (const auto& f : std::filesystem::directory_iterator(dir))
      if (!removed && f.path().filename().string().find("fouling") != std::string::npos) {
        std::filesystem::remove(f.path());
        removed = true;
      }
    REQUIRE(removed);
    CHECK_THROWS_AS(build_manifest(d.path), DatasetError);
  }
}
