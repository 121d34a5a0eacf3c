#include "hullscan/stages/train_util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hullscan/nn/tensor_util.hpp"
#include "hullscan/raster/transform.hpp"

namespace hullscan::stages {

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be positive");
  if (!(cfg.final_lr_fraction > 0.0 && cfg.final_lr_fraction <= 1.0)) {
    throw std::invalid_argument("TrainConfig: final_lr_fraction must be in (0, 1]");
  }
  if (cfg.max_steps < 0) throw std::invalid_argument("TrainConfig: max_steps must be >= 0");
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(epoch) + 1);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  return order;
}

TrainHistory run_training(torch::nn::Module& module, std::size_t samples, const TrainConfig& cfg,
                          const std::function<torch::Tensor(std::span<const std::size_t>)>& step_loss,
                          const ProgressFn& progress, const std::function<void(int)>& on_epoch_end) {
  validate(cfg);
  if (samples == 0) throw std::invalid_argument("training set is empty");
  module.train();
  torch::optim::Adam opt(module.parameters(),
                         torch::optim::AdamOptions(cfg.lr).weight_decay(cfg.weight_decay));
  const std::size_t batches = (samples + cfg.batch_size - 1) / cfg.batch_size;
  std::size_t total_steps = batches * cfg.epochs;
  if (cfg.max_steps > 0) total_steps = std::min<std::size_t>(total_steps, cfg.max_steps);
  TrainHistory history;
  std::size_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs && step < total_steps; ++epoch) {
    const auto order = epoch_order(samples, cfg.seed, epoch);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t b = 0; b < batches && step < total_steps; ++b, ++step) {
      const double t = total_steps > 1 ? static_cast<double>(step) / (total_steps - 1) : 0.0;
      const double lr = cfg.lr * (cfg.final_lr_fraction + (1.0 - cfg.final_lr_fraction) * 0.5 * (1.0 + std::cos(M_PI * t)));
      for (auto& group : opt.param_groups()) static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(samples, lo + cfg.batch_size);
      opt.zero_grad();
      auto loss = step_loss(std::span<const std::size_t>(order.data() + lo, hi - lo));
      loss.backward();
      opt.step();
      const double v = loss.item<double>();
      if (!std::isfinite(v)) throw std::runtime_error("training diverged (non-finite loss)");
      history.step_loss.push_back(v);
      sum += v;
      ++count;
    }
    history.epoch_loss.push_back(sum / std::max<std::size_t>(count, 1));
    if (progress) {
      std::ostringstream os;
      os << "epoch " << epoch + 1 << "/" << cfg.epochs << " loss " << history.epoch_loss.back();
      progress(os.str());
    }
    if (on_epoch_end) on_epoch_end(epoch);
  }
  module.eval();
  return history;
}

data::ImageRecord to_ship_frame(const data::ImageRecord& record) {
  if (!record.ship_mask) throw std::invalid_argument("record " + record.id + " has no ship mask");
  const CroppedShip crop = crop_resize_ship(record.pixels, *record.ship_mask);
  data::ImageRecord out;
  out.id = record.id;
  out.split = record.split;
  out.pixels = crop.image;
  out.ship_mask = crop_mask(*record.ship_mask, crop.transform);
  if (record.boundaries) out.boundaries = crop_boundaries(*record.boundaries, crop.transform);
  if (record.defect_masks) {
    out.defect_masks = maskset_restrict(crop_maskset(*record.defect_masks, crop.transform), *out.ship_mask);
  }
  return out;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs}, {"batch_size", c.batch_size}, {"lr", c.lr}, {"weight_decay", c.weight_decay},
          {"final_lr_fraction", c.final_lr_fraction}, {"seed", c.seed}, {"max_steps", c.max_steps}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs");
  c.batch_size = j.at("batch_size");
  c.lr = j.at("lr");
  c.weight_decay = j.at("weight_decay");
  c.final_lr_fraction = j.at("final_lr_fraction");
  c.seed = j.at("seed");
  c.max_steps = j.at("max_steps");
  return c;
}

nlohmann::json to_json(const nn::ResNetOptions& o) { return {{"base_width", o.base_width}, {"blocks", o.blocks}}; }

nn::ResNetOptions resnet_from_json(const nlohmann::json& j) {
  nn::ResNetOptions o;
  o.base_width = j.at("base_width");
  o.blocks = j.at("blocks");
  return o;
}

nlohmann::json to_json(const nn::UNetOptions& o) {
  return {{"encoder", to_json(o.encoder)}, {"decoder", o.decoder}, {"classes", o.classes}};
}

nn::UNetOptions unet_from_json(const nlohmann::json& j) {
  nn::UNetOptions o;
  o.encoder = resnet_from_json(j.at("encoder"));
  o.decoder = j.at("decoder");
  o.classes = j.at("classes");
  return o;
}

nlohmann::json to_json(const nn::SectionNetOptions& o) {
  return {{"encoder", to_json(o.encoder)}, {"frame_rows", o.frame_rows}, {"frame_cols", o.frame_cols},
          {"compress", o.compress}, {"steps", o.steps}, {"hidden", o.hidden}};
}

nn::SectionNetOptions section_net_from_json(const nlohmann::json& j) {
  nn::SectionNetOptions o;
  o.encoder = resnet_from_json(j.at("encoder"));
  o.frame_rows = j.at("frame_rows");
  o.frame_cols = j.at("frame_cols");
  o.compress = j.at("compress");
  o.steps = j.at("steps");
  o.hidden = j.at("hidden");
  return o;
}

nlohmann::json to_json(const nn::DenseNetOptions& o) {
  return {{"init_features", o.init_features}, {"growth", o.growth}, {"blocks", o.blocks}, {"bottleneck", o.bottleneck}};
}

nn::DenseNetOptions densenet_from_json(const nlohmann::json& j) {
  nn::DenseNetOptions o;
  o.init_features = j.at("init_features");
  o.growth = j.at("growth");
  o.blocks = j.at("blocks");
  o.bottleneck = j.at("bottleneck");
  return o;
}

nlohmann::json to_json(const nn::StnOptions& o) { return {{"channels", o.channels}, {"patch", o.patch}}; }

nn::StnOptions stn_from_json(const nlohmann::json& j) {
  nn::StnOptions o;
  o.channels = j.at("channels");
  o.patch = j.at("patch");
  return o;
}

}  // namespace hullscan::stages
