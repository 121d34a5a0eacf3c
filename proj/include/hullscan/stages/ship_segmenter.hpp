#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "hullscan/data/dataset_io.hpp"
#include "hullscan/stages/train_util.hpp"

namespace hullscan::stages {

inline constexpr const char* kShipArchitecture = "hullscan.ship_unet.v1";

struct ShipSegConfig {
  nn::UNetOptions net;  ///< classes is forced to 1
  TrainConfig train;
  double threshold = 0.5;
};

struct ShipSegModel {
  nn::UNet net{nullptr};
  ShipSegConfig config;

  explicit ShipSegModel(const ShipSegConfig& cfg = {});
  void save(const std::filesystem::path& path);
  static ShipSegModel load(const std::filesystem::path& path);
};

/// A training pair at frame size.
struct ShipSample {
  RgbImage image;
  BinaryMask mask;
};

/// Records carrying a ship mask, resized to the frame.
std::vector<ShipSample> ship_samples(std::span<const data::ImageRecord> records);

struct ShipTrainResult {
  ShipSegModel model;
  TrainHistory history;
};

/// Per-pixel binary cross-entropy. Throws std::invalid_argument on an empty set.
ShipTrainResult train_ship_segmenter(std::span<const ShipSample> samples, const ShipSegConfig& cfg,
                                     const ProgressFn& progress = {});
ShipTrainResult train_ship_segmenter(const data::Manifest& manifest, const std::filesystem::path& root,
                                     const ShipSegConfig& cfg, const ProgressFn& progress = {});

/// Largest 4-connected component; ties go to the topmost, then leftmost centroid.
BinaryMask largest_component(const BinaryMask& mask);

/// Ship probability at frame size, [rows, cols].
torch::Tensor ship_probabilities(ShipSegModel& model, const RgbImage& image);

/// Binary ship mask at the image's resolution. Throws NoShipError when no
/// pixel clears the threshold.
BinaryMask segment_ship(ShipSegModel& model, const RgbImage& image);

}  // namespace hullscan::stages
