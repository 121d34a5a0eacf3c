#include "hullscan/stages/ship_segmenter.hpp"

#include <opencv2/imgproc.hpp>

#include <stdexcept>

#include "hullscan/nn/checkpoint.hpp"
#include "hullscan/nn/tensor_util.hpp"
#include "hullscan/raster/transform.hpp"

namespace hullscan::stages {

namespace {

nlohmann::json config_json(const ShipSegConfig& c) {
  return {{"net", to_json(c.net)}, {"train", to_json(c.train)}, {"threshold", c.threshold}};
}

}  // namespace

ShipSegModel::ShipSegModel(const ShipSegConfig& cfg) : config(cfg) {
  config.net.classes = 1;
  net = nn::UNet(config.net);
}

void ShipSegModel::save(const std::filesystem::path& path) {
  nn::save_checkpoint(path, *net, kShipArchitecture, config_json(config));
}

ShipSegModel ShipSegModel::load(const std::filesystem::path& path) {
  const auto header = nn::read_checkpoint_header(path);
  ShipSegConfig cfg;
  try {
    cfg.net = unet_from_json(header.config.at("net"));
    cfg.train = train_config_from_json(header.config.at("train"));
    cfg.threshold = header.config.at("threshold");
  } catch (const nlohmann::json::exception& e) {
    throw nn::CheckpointError("ship checkpoint config: " + std::string(e.what()));
  }
  ShipSegModel model(cfg);
  nn::load_checkpoint(path, *model.net, kShipArchitecture);
  model.net->eval();
  return model;
}

std::vector<ShipSample> ship_samples(std::span<const data::ImageRecord> records) {
  std::vector<ShipSample> out;
  for (const auto& r : records) {
    if (!r.ship_mask) continue;
    out.push_back({resize_image(r.pixels, kFrameHeight, kFrameWidth), resize_mask(*r.ship_mask, kFrameHeight, kFrameWidth)});
  }
  return out;
}

ShipTrainResult train_ship_segmenter(std::span<const ShipSample> samples, const ShipSegConfig& cfg,
                                     const ProgressFn& progress) {
  if (samples.empty()) throw std::invalid_argument("train_ship_segmenter: no training images with ship masks");
  nn::make_deterministic(cfg.train.seed);
  ShipSegModel model(cfg);
  auto step = [&](std::span<const std::size_t> idx) {
    std::vector<const RgbImage*> imgs;
    std::vector<torch::Tensor> masks;
    for (auto i : idx) {
      imgs.push_back(&samples[i].image);
      masks.push_back(nn::mask_to_tensor(samples[i].mask));
    }
    auto logits = model.net->forward(nn::images_to_batch(imgs)).squeeze(1);
    return torch::binary_cross_entropy_with_logits(logits, torch::stack(masks));
  };
  auto history = run_training(*model.net, samples.size(), cfg.train, step, progress);
  return {std::move(model), std::move(history)};
}

ShipTrainResult train_ship_segmenter(const data::Manifest& manifest, const std::filesystem::path& root,
                                     const ShipSegConfig& cfg, const ProgressFn& progress) {
  std::vector<data::ImageRecord> records;
  for (const auto* e : manifest.split(data::Split::train)) {
    if (e->has_ship()) records.push_back(data::load_record(root, *e));
  }
  const auto samples = ship_samples(records);
  return train_ship_segmenter(samples, cfg, progress);
}

BinaryMask largest_component(const BinaryMask& mask) {
  cv::Mat src(mask.rows(), mask.cols(), CV_8U, const_cast<std::uint8_t*>(mask.data().data()));
  cv::Mat labels, stats, centroids;
  const int n = cv::connectedComponentsWithStats(src, labels, stats, centroids, 4, CV_32S);
  int best = 0;
  for (int k = 1; k < n; ++k) {
    if (best == 0) {
      best = k;
      continue;
    }
    const int a = stats.at<int>(k, cv::CC_STAT_AREA);
    const int b = stats.at<int>(best, cv::CC_STAT_AREA);
    const double ky = centroids.at<double>(k, 1), by = centroids.at<double>(best, 1);
    const double kx = centroids.at<double>(k, 0), bx = centroids.at<double>(best, 0);
    if (a > b || (a == b && (ky < by || (ky == by && kx < bx)))) best = k;
  }
  BinaryMask out(mask.rows(), mask.cols());
  if (best == 0) return out;
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c)
      if (labels.at<int>(r, c) == best) out.set(r, c, true);
  return out;
}

torch::Tensor ship_probabilities(ShipSegModel& model, const RgbImage& image) {
  torch::NoGradGuard guard;
  model.net->eval();
  const RgbImage frame = resize_image(image, kFrameHeight, kFrameWidth);
  return torch::sigmoid(model.net->forward(nn::image_to_tensor(frame).unsqueeze(0)))[0][0];
}

BinaryMask segment_ship(ShipSegModel& model, const RgbImage& image) {
  const auto prob = ship_probabilities(model, image);
  BinaryMask frame = largest_component(nn::tensor_to_mask(prob, model.config.threshold));
  if (!frame.any()) throw NoShipError("no pixel above the ship threshold");
  BinaryMask full = largest_component(resize_mask(frame, image.rows(), image.cols()));
  if (!full.any()) throw NoShipError("ship vanished when resized to the source resolution");
  return full;
}

}  // namespace hullscan::stages
