#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "hullscan/data/dataset_io.hpp"
#include "hullscan/raster/transform.hpp"
#include "hullscan/stages/train_util.hpp"

namespace hullscan::stages {

inline constexpr const char* kSectionArchitecture = "hullscan.section_net.v1";

struct SectionModelConfig {
  nn::SectionNetOptions net;
  TrainConfig train;
};

struct SectionModel {
  nn::SectionNet net{nullptr};
  SectionModelConfig config;

  explicit SectionModel(const SectionModelConfig& cfg = {});
  void save(const std::filesystem::path& path);
  static SectionModel load(const std::filesystem::path& path);
};

/// A cropped ship frame and its boundary target; the range mask is target.valid.
struct SectionSample {
  RgbImage image;
  BoundaryPair target;
};

/// Crop to the ground-truth ship and resample the boundaries into the frame.
SectionSample make_section_sample(const data::ImageRecord& record);

/// Originals, then `multiplier` randomly rotated and shifted copies and one
/// channel-flipped copy of each original. Multiplier 0 returns the originals.
std::vector<SectionSample> augment_section_dataset(std::span<const SectionSample> originals, int multiplier,
                                                   const AugmentRanges& ranges, std::uint64_t seed);

/// [N, 2, W] targets and masks.
torch::Tensor boundary_targets(std::span<const BoundaryPair* const> pairs);
torch::Tensor boundary_masks(std::span<const BoundaryPair* const> pairs);

struct SectionTrainResult {
  SectionModel model;
  TrainHistory history;
};

/// Minimizes the per-sample range-aware loss (averaged over each batch).
SectionTrainResult train_section_model(std::span<const SectionSample> samples, const SectionModelConfig& cfg,
                                       const ProgressFn& progress = {});

/// Raw [2, W] prediction for a frame-sized image.
torch::Tensor predict_curves(SectionModel& model, const RgbImage& frame);

/// Boundaries for a cropped ship frame. Columns are valid where the frame's
/// ship mask has any pixel.
BoundaryPair predict_boundaries(SectionModel& model, const RgbImage& frame, const BinaryMask& frame_ship);

}  // namespace hullscan::stages
