#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hullscan/data/record.hpp"
#include "hullscan/nn/densenet.hpp"
#include "hullscan/nn/horizon.hpp"
#include "hullscan/nn/stn.hpp"
#include "hullscan/nn/unet.hpp"

namespace hullscan::stages {

struct TrainConfig {
  int epochs = 5;
  int batch_size = 4;
  double lr = 1e-3;
  double weight_decay = 0.0;
  /// Cosine decay from lr to lr * final_lr_fraction over all steps.
  double final_lr_fraction = 1.0;
  std::uint64_t seed = 1;
  /// Stop after this many optimizer steps (0 = no limit).
  int max_steps = 0;
};

void validate(const TrainConfig& cfg);

struct TrainHistory {
  std::vector<double> epoch_loss;
  std::vector<double> step_loss;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Deterministic permutation of 0..n-1 for one epoch.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch);

/// Drives the Adam loop shared by every stage. `step_loss(indices)` computes
/// the mean loss of one minibatch of sample indices.
TrainHistory run_training(torch::nn::Module& module, std::size_t samples, const TrainConfig& cfg,
                          const std::function<torch::Tensor(std::span<const std::size_t>)>& step_loss,
                          const ProgressFn& progress = {},
                          const std::function<void(int)>& on_epoch_end = {});

/// Record moved into its ground-truth ship frame: every raster is cropped to the
/// ship's bounding box and resized to the frame size.
data::ImageRecord to_ship_frame(const data::ImageRecord& record);

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const nn::ResNetOptions& o);
nn::ResNetOptions resnet_from_json(const nlohmann::json& j);
nlohmann::json to_json(const nn::UNetOptions& o);
nn::UNetOptions unet_from_json(const nlohmann::json& j);
nlohmann::json to_json(const nn::SectionNetOptions& o);
nn::SectionNetOptions section_net_from_json(const nlohmann::json& j);
nlohmann::json to_json(const nn::DenseNetOptions& o);
nn::DenseNetOptions densenet_from_json(const nlohmann::json& j);
nlohmann::json to_json(const nn::StnOptions& o);
nn::StnOptions stn_from_json(const nlohmann::json& j);

}  // namespace hullscan::stages
