#include "hullscan/stages/section_model.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "hullscan/nn/checkpoint.hpp"
#include "hullscan/nn/losses.hpp"
#include "hullscan/nn/tensor_util.hpp"

namespace hullscan::stages {

SectionModel::SectionModel(const SectionModelConfig& cfg) : net(nn::SectionNet(cfg.net)), config(cfg) {}

void SectionModel::save(const std::filesystem::path& path) {
  nn::save_checkpoint(path, *net, kSectionArchitecture,
                      {{"net", to_json(config.net)}, {"train", to_json(config.train)}});
}

SectionModel SectionModel::load(const std::filesystem::path& path) {
  const auto header = nn::read_checkpoint_header(path);
  SectionModelConfig cfg;
  try {
    cfg.net = section_net_from_json(header.config.at("net"));
    cfg.train = train_config_from_json(header.config.at("train"));
  } catch (const nlohmann::json::exception& e) {
    throw nn::CheckpointError("section checkpoint config: " + std::string(e.what()));
  }
  SectionModel model(cfg);
  nn::load_checkpoint(path, *model.net, kSectionArchitecture);
  model.net->eval();
  return model;
}

SectionSample make_section_sample(const data::ImageRecord& record) {
  if (!record.ship_mask || !record.boundaries) {
    throw std::invalid_argument("record " + record.id + " lacks a ship mask or boundaries");
  }
  const CroppedShip crop = crop_resize_ship(record.pixels, *record.ship_mask);
  return {crop.image, crop_boundaries(*record.boundaries, crop.transform)};
}

std::vector<SectionSample> augment_section_dataset(std::span<const SectionSample> originals, int multiplier,
                                                   const AugmentRanges& ranges, std::uint64_t seed) {
  if (multiplier < 0) throw std::invalid_argument("augment_section_dataset: negative multiplier");
  std::vector<SectionSample> out(originals.begin(), originals.end());
  if (multiplier == 0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (const auto& s : originals) {
    for (int k = 0; k < multiplier; ++k) {
      AugmentParams p;
      p.rotation_deg = unit(rng) * ranges.max_rotation_deg;
      p.dx = unit(rng) * ranges.max_shift_frac * s.image.cols();
      p.dy = unit(rng) * ranges.max_shift_frac * s.image.rows();
      const Augmented a = augment(s.image, s.target, p, ranges);
      out.push_back({a.image, a.boundaries});
    }
    out.push_back({flip_channels(s.image), s.target});
  }
  return out;
}

torch::Tensor boundary_targets(std::span<const BoundaryPair* const> pairs) {
  std::vector<torch::Tensor> rows;
  for (const auto* b : pairs) {
    auto t = torch::empty({2, b->width()}, torch::kFloat32);
    auto a = t.accessor<float, 2>();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < b->width(); ++j) a[i][j] = b->valid[i][j] ? static_cast<float>(b->y[i][j]) : 0.0f;
    rows.push_back(t);
  }
  return torch::stack(rows);
}

torch::Tensor boundary_masks(std::span<const BoundaryPair* const> pairs) {
  std::vector<torch::Tensor> rows;
  for (const auto* b : pairs) {
    auto t = torch::empty({2, b->width()}, torch::kFloat32);
    auto a = t.accessor<float, 2>();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < b->width(); ++j) a[i][j] = b->valid[i][j] ? 1.0f : 0.0f;
    rows.push_back(t);
  }
  return torch::stack(rows);
}

SectionTrainResult train_section_model(std::span<const SectionSample> samples, const SectionModelConfig& cfg,
                                       const ProgressFn& progress) {
  if (samples.empty()) throw std::invalid_argument("train_section_model: empty dataset");
  for (const auto& s : samples) {
    if (s.image.rows() != cfg.net.frame_rows || s.image.cols() != cfg.net.frame_cols) {
      throw std::invalid_argument("train_section_model: sample size differs from the model frame");
    }
  }
  nn::make_deterministic(cfg.train.seed);
  SectionModel model(cfg);
  auto step = [&](std::span<const std::size_t> idx) {
    std::vector<const RgbImage*> imgs;
    std::vector<const BoundaryPair*> targets;
    for (auto i : idx) {
      imgs.push_back(&samples[i].image);
      targets.push_back(&samples[i].target);
    }
    auto pred = model.net->forward(nn::images_to_batch(imgs));
    return nn::range_aware_loss(pred, boundary_targets(targets), boundary_masks(targets)) /
           static_cast<double>(idx.size());
  };
  auto history = run_training(*model.net, samples.size(), cfg.train, step, progress);
  return {std::move(model), std::move(history)};
}

torch::Tensor predict_curves(SectionModel& model, const RgbImage& frame) {
  torch::NoGradGuard guard;
  model.net->eval();
  return model.net->forward(nn::image_to_tensor(frame).unsqueeze(0))[0];
}

BoundaryPair predict_boundaries(SectionModel& model, const RgbImage& frame, const BinaryMask& frame_ship) {
  require_same_shape(frame_ship.rows(), frame_ship.cols(), frame.rows(), frame.cols(), "predict_boundaries");
  const auto curves = predict_curves(model, frame).to(torch::kFloat64).contiguous();
  const auto a = curves.accessor<double, 2>();
  const int w = frame.cols();
  std::vector<std::uint8_t> occupied(w, 0);
  for (int r = 0; r < frame_ship.rows(); ++r)
    for (int c = 0; c < w; ++c)
      if (frame_ship.test(r, c)) occupied[c] = 1;
  BoundaryPair b;
  for (int i = 0; i < 2; ++i) {
    b.y[i].resize(w);
    b.valid[i] = occupied;
    for (int j = 0; j < w; ++j) b.y[i][j] = a[i][j];
  }
  for (int j = 0; j < w; ++j) b.y[1][j] = std::max(b.y[0][j], b.y[1][j]);
  return b;
}

}  // namespace hullscan::stages
