#include <doctest.h>

#include <cmath>

#include "hullscan/data/scene.hpp"
#include "hullscan/eval/pipeline.hpp"
#include "hullscan/stages/classifier_training.hpp"
#include "hullscan/stages/defect_segmenter.hpp"
#include "hullscan/stages/section_model.hpp"
#include "hullscan/stages/ship_segmenter.hpp"

using namespace hullscan;
using namespace hullscan::stages;

namespace {

DfeNetOptions small_dfe() {
  DfeNetOptions o;
  o.stn.channels = {8, 8, 4};
  o.extractor.init_features = 16;
  o.extractor.growth = 8;
  o.head = {64, 32, 16};
  return o;
}

data::Patch roi_patch(int row, int col, int size) {
  data::Patch p;
  p.pixels = RgbImage(size, size);
  p.row = row;
  p.col = col;
  p.roi_ratio = 1.0;
  return p;
}

}  // namespace

TEST_CASE("dfe net at full width") {
  torch::manual_seed(1);
  DfeNet net;
  net->eval();
  CHECK(net->feature_dim() == 1024);
  CHECK(net->gh_input() == 1024);
  CHECK(net->dh_input() == 2048);
  torch::NoGradGuard guard;
  const auto out = net->forward(torch::rand({2, 3, 64, 64}));
  CHECK(out.p.sizes() == at::IntArrayRef{2, 3});
  CHECK(out.f_g.sizes() == at::IntArrayRef{2, 1024});
  CHECK(out.f_d.sizes() == at::IntArrayRef{2, 1024});
  CHECK(out.p.min().item<double>() > 0.0);
  CHECK(out.p.max().item<double>() < 1.0);
}

TEST_CASE("dfe net variants") {
  torch::manual_seed(2);
  auto o = small_dfe();
  o.use_dfe = false;
  DfeNet no_dfe(o);
  CHECK(no_dfe->dh_input() == 0);
  torch::NoGradGuard guard;
  no_dfe->eval();
  CHECK_FALSE(no_dfe->forward(torch::rand({1, 3, 64, 64})).f_d.defined());

  o.multiclass = true;
  DfeNet mc(o);
  mc->eval();
  const auto out = mc->forward(torch::rand({3, 3, 64, 64}));
  CHECK(torch::allclose(out.p.sum(1), torch::ones({3})));

  auto bad = small_dfe();
  bad.multiclass = true;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("multiclass decisions break ties on the first index") {
  ClassifierConfig cfg;
  cfg.net = small_dfe();
  cfg.net.use_dfe = false;
  cfg.net.multiclass = true;
  ClassifierModel model(cfg);
  const std::vector<std::array<double, 3>> p{{0.4, 0.4, 0.2}, {0.1, 0.3, 0.6}};
  const auto d = decide(model, p);
  CHECK(d[0] == std::array<int, 3>{1, 0, 0});
  CHECK(d[1] == std::array<int, 3>{0, 0, 1});
}

TEST_CASE("largest_component keeps the bigger blob") {
  BinaryMask m(40, 40);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) m.set(r, c);  // 100 px
  for (int r = 20; r < 25; ++r)
    for (int c = 20; c < 28; ++c) m.set(r, c);  // 40 px
  const auto out = largest_component(m);
  CHECK(out.count() == 100);
  CHECK(out.test(0, 0));
  CHECK_FALSE(out.test(20, 20));
  CHECK_FALSE(largest_component(BinaryMask(5, 5)).any());
}

TEST_CASE("assemble_defect_map") {
  const int size = 64;
  MaskSet stage3(64, 128);
  auto patch = roi_patch(0, 0, size);
  // 40 RoI pixels in the tile.
  for (int i = 0; i < 40; ++i) stage3[Defect::delamination].set(i / 8, i % 8);
  const std::vector<data::Patch> patches{patch};

  SUBCASE("single patch p=(0.9,0.2,0.1)") {
    const std::vector<std::array<double, 3>> p{{0.9, 0.2, 0.1}};
    const auto out = assemble_defect_map(stage3, patches, p, size, 0.5);
    CHECK(out[Defect::corrosion].count() == 40);
    CHECK_FALSE(out[Defect::fouling].any());
    CHECK_FALSE(out[Defect::delamination].any());
  }

  SUBCASE("overlapping labels share pixels") {
    const std::vector<std::array<double, 3>> p{{0.9, 0.8, 0.1}};
    const auto out = assemble_defect_map(stage3, patches, p, size, 0.5);
    CHECK(out[Defect::corrosion] == out[Defect::fouling]);
    CHECK(out[Defect::corrosion].count() == 40);
  }

  SUBCASE("all negative predictions give empty maps in classified tiles") {
    const std::vector<std::array<double, 3>> p{{0.1, 0.1, 0.1}};
    const auto out = assemble_defect_map(stage3, patches, p, size, 0.5);
    for (const auto& m : out.masks) CHECK_FALSE(m.any());
  }
}

TEST_CASE("label fusion") {
  MaskSet human(20, 20), pseudo(20, 20);
  for (int c = 0; c < 5; ++c) human[Defect::corrosion].set(0, c);   // 5 px
  for (int c = 0; c < 7; ++c) pseudo[Defect::corrosion].set(10, c);  // 7 px disjoint
  pseudo[Defect::fouling].set(3, 3);

  CHECK(fuse_labels(human, MaskSet(20, 20)).masks == human.masks);
  const auto fused = fuse_labels(human, pseudo);
  CHECK(fused[Defect::corrosion].count() == 12);
  for (int k = 0; k < 3; ++k) {
    CHECK(mask_intersection(human.masks[k], fused.masks[k]) == human.masks[k]);
    CHECK(mask_intersection(pseudo.masks[k], fused.masks[k]) == pseudo.masks[k]);
  }

  MaskSet fouled(20, 20);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) fouled[Defect::fouling].set(r, c);
  MaskSet guess(20, 20);
  guess[Defect::fouling].set(0, 0);
  const auto inter = fuse_labels_intersection(fouled, guess, 20);
  CHECK(inter[Defect::fouling].count() == 1);
  for (int k = 0; k < 3; ++k) CHECK(mask_intersection(inter.masks[k], fouled.masks[k]) == inter.masks[k]);
}

TEST_CASE("soft dice loss") {
  auto target = torch::zeros({1, 3, 4, 4});
  target.index_put_({0, 0, 0, 0}, 1.0);
  const auto good = (target * 40.0 - 20.0);
  const auto bad = -good;
  CHECK(soft_dice_loss(good, target).item<double>() < 1e-3);
  CHECK(soft_dice_loss(bad, target).item<double>() > 0.3);
}

TEST_CASE("augment_section_dataset sizes") {
  data::SceneSpec spec;
  const auto rec = data::generate_scene(spec);
  const std::vector<SectionSample> originals{make_section_sample(rec)};
  CHECK(augment_section_dataset(originals, 0, {}, 1).size() == 1);
  const auto aug = augment_section_dataset(originals, 3, {}, 1);
  CHECK(aug.size() == 5);
  for (const auto& s : aug) CHECK_NOTHROW(validate(s.target));
  CHECK(aug.back().target == originals[0].target);
  CHECK(aug.back().image == flip_channels(originals[0].image));
}

TEST_CASE("epoch order is a seeded permutation") {
  const auto a = epoch_order(50, 3, 0), b = epoch_order(50, 3, 0), c = epoch_order(50, 3, 1);
  CHECK(a == b);
  CHECK(a != c);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
}

TEST_CASE("pipeline reports a missing ship") {
  torch::manual_seed(3);
  ShipSegConfig ship_cfg;
  ship_cfg.net.encoder.base_width = 8;
  ship_cfg.net.decoder = {16, 16, 8, 8, 4};
  SectionModelConfig sec_cfg;
  sec_cfg.net.encoder.base_width = 8;
  sec_cfg.net.hidden = 8;
  DefectSegConfig def_cfg;
  def_cfg.net = ship_cfg.net;
  ClassifierConfig cls_cfg;
  cls_cfg.net = small_dfe();
  eval::PipelineModels models{ShipSegModel(ship_cfg), SectionModel(sec_cfg), DefectSegModel(def_cfg),
                              ClassifierModel(cls_cfg)};
  eval::PipelineConfig cfg;
  cfg.ship_threshold = 1.0;
  RgbImage plain(480, 640);
  const auto res = eval::run_pipeline(models, plain, "empty", cfg);
  CHECK_FALSE(res.report.diagnostic.empty());
  for (const auto& s : res.report.sections) CHECK_FALSE(s.present);
  CHECK_FALSE(res.ship.any());
}

TEST_CASE("pipeline checkpoint errors name the stage") {
  eval::PipelineConfig cfg;
  cfg.ship_checkpoint = "/nonexistent/ship.ckpt";
  try {
    eval::PipelineModels::load(cfg);
    FAIL("expected StageError");
  } catch (const eval::StageError& e) {
    CHECK(e.stage() == "stage1");
  }
}
