#include <doctest.h>

#include <filesystem>

#include "hullscan/data/patches.hpp"
#include "hullscan/data/scene.hpp"
#include "hullscan/stages/classifier_training.hpp"
#include "hullscan/stages/defect_segmenter.hpp"
#include "hullscan/stages/section_model.hpp"
#include "hullscan/stages/ship_segmenter.hpp"

using namespace hullscan;
using namespace hullscan::stages;

namespace {

nn::UNetOptions tiny_unet() {
  nn::UNetOptions o;
  o.encoder.base_width = 8;
  o.decoder = {32, 24, 16, 8, 8};
  return o;
}

data::ImageRecord busy_scene(std::uint64_t seed) {
  auto spec = data::random_scene_spec(seed);
  spec.blobs[0].count = 3;
  spec.blobs[1].count = 2;
  spec.blobs[2].count = 2;
  return data::generate_scene(spec);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hullscan_probe_" + name);
}

bool same_parameters(torch::nn::Module& a, torch::nn::Module& b) {
  const auto pa = a.parameters(), pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (!torch::equal(pa[i], pb[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("ship segmenter memorizes one image") {
  const auto rec = busy_scene(1);
  const std::vector<data::ImageRecord> recs{rec};
  const auto samples = ship_samples(recs);
  ShipSegConfig cfg;
  cfg.net = tiny_unet();
  cfg.train.epochs = 60;
  cfg.train.batch_size = 1;
  cfg.train.lr = 3e-3;
  auto res = train_ship_segmenter(samples, cfg);
  CHECK(res.history.step_loss.back() < 0.05);

  const auto path = temp_file("ship.ckpt");
  res.model.save(path);
  auto loaded = ShipSegModel::load(path);
  CHECK(torch::equal(ship_probabilities(res.model, rec.pixels), ship_probabilities(loaded, rec.pixels)));
  std::filesystem::remove(path);
}

TEST_CASE("defect segmenter probes") {
  std::vector<data::Patch> patches;
  for (std::uint64_t s = 1; patches.size() < 8; ++s)
    for (auto& p : data::slice_seg_patches(busy_scene(s), 64, 0.05)) patches.push_back(std::move(p));

  DefectSegConfig cfg;
  cfg.net = tiny_unet();
  cfg.patch = 64;
  cfg.dice_weight = 0.0;
  cfg.train.batch_size = 2;
  cfg.train.lr = 3e-3;

  SUBCASE("overfit two patches") {
    cfg.train.epochs = 150;
    const std::vector<data::Patch> two(patches.begin(), patches.begin() + 2);
    auto res = train_teacher(two, cfg);
    CHECK(res.history.epoch_loss.back() < 0.05);
  }

  SUBCASE("loss falls over the first epochs, seeded runs agree") {
    cfg.train.epochs = 5;
    auto a = train_teacher(patches, cfg);
    auto b = train_teacher(patches, cfg);
    CHECK(a.history.epoch_loss.back() < a.history.epoch_loss.front());
    CHECK(same_parameters(*a.model.net, *b.model.net));
    CHECK(a.model.net->forward(torch::zeros({1, 3, 64, 64})).size(1) == 3);

    const auto path = temp_file("defect.ckpt");
    a.model.save(path);
    auto loaded = DefectSegModel::load(path);
    CHECK(loaded.role == ModelRole::teacher);
    const auto img = busy_scene(9).pixels;
    CHECK(torch::equal(defect_probabilities(a.model, img), defect_probabilities(loaded, img)));
    const auto seg = segment_defects(loaded, img);
    CHECK(seg.roi == seg.masks.any());
    CHECK(seg.roi.rows() == img.rows());
    CHECK(seg.roi.cols() == img.cols());
    std::filesystem::remove(path);
  }
}

TEST_CASE("section model memorizes one frame") {
  const std::vector<SectionSample> one{make_section_sample(busy_scene(2))};
  SectionModelConfig cfg;
  cfg.net.encoder.base_width = 8;
  cfg.net.hidden = 32;
  cfg.train.epochs = 80;
  cfg.train.batch_size = 1;
  cfg.train.lr = 3e-3;
  auto res = train_section_model(one, cfg);
  std::size_t valid = 0;
  for (const auto& v : one[0].target.valid)
    for (auto f : v) valid += f;
  REQUIRE(valid > 0);
  // The training loss sums over boundary positions; compare it per position.
  CHECK(res.history.step_loss.back() / static_cast<double>(valid) < 0.01);

  const auto path = temp_file("section.ckpt");
  res.model.save(path);
  auto loaded = SectionModel::load(path);
  CHECK(torch::equal(predict_curves(res.model, one[0].image), predict_curves(loaded, one[0].image)));
  std::filesystem::remove(path);
}

TEST_CASE("classifier memorizes four patches") {
  std::vector<data::Patch> patches;
  const std::array<std::array<std::uint8_t, 3>, 4> labels{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}}};
  const std::array<std::array<std::uint8_t, 3>, 4> colors{{{172, 92, 42}, {76, 112, 52}, {226, 220, 204}, {40, 40, 46}}};
  for (int i = 0; i < 4; ++i) {
    data::Patch p;
    p.pixels = RgbImage(64, 64);
    for (int r = 0; r < 64; ++r)
      for (int c = 0; c < 64; ++c)
        for (int k = 0; k < 3; ++k) p.pixels.at(r, c, k) = static_cast<std::uint8_t>(colors[i][k] + ((r / 8 + c / 8) % 2) * 10);
    p.labels = labels[i];
    for (int k = 0; k < 3; ++k) p.overlap[k] = labels[i][k] * 100;
    patches.push_back(std::move(p));
  }
  ClassifierConfig cfg;
  cfg.net.stn.channels = {8, 8, 4};
  cfg.net.extractor.init_features = 16;
  cfg.net.extractor.growth = 8;
  cfg.net.head = {64, 32, 16};
  cfg.net.dropout = 0.0;
  cfg.train.epochs = 60;
  cfg.train.batch_size = 4;
  cfg.train.lr = 2e-3;
  auto res = train_classifier(patches, cfg);
  const auto p = predict_patches(res.model, patches);
  const auto d = decide(res.model, p);
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 3; ++k) CHECK(d[i][k] == labels[i][k]);
  CHECK(res.epoch_mean_abs_cos.size() == 60);

  const auto path = temp_file("cls.ckpt");
  res.model.save(path);
  auto loaded = ClassifierModel::load(path);
  CHECK((predict_patches(loaded, patches) == p));
  std::filesystem::remove(path);
}
