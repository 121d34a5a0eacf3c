#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "hullscan/data/patches.hpp"
#include "hullscan/eval/metrics.hpp"
#include "hullscan/nn/losses.hpp"
#include "hullscan/stages/dfe_net.hpp"
#include "hullscan/stages/train_util.hpp"

namespace hullscan::stages {

inline constexpr const char* kClassifierArchitecture = "hullscan.dfe_net.v1";

struct ClassifierConfig {
  DfeNetOptions net;
  nn::ClsLossConfig loss;
  TrainConfig train;
  double threshold = 0.5;
  /// RoI fraction a 64x64 tile needs to be classified.
  double roi_thresh = 0.1;
};

struct ClassifierModel {
  DfeNet net{nullptr};
  ClassifierConfig config;

  explicit ClassifierModel(const ClassifierConfig& cfg = {});
  void save(const std::filesystem::path& path);
  static ClassifierModel load(const std::filesystem::path& path);
};

struct ClassifierTrainResult {
  ClassifierModel model;
  TrainHistory history;
  /// Mean |cos(F_G, F_D)| over each epoch's training batches (empty without the branch).
  std::vector<double> epoch_mean_abs_cos;
};

/// Index of the class with the most ground-truth RoI pixels; -1 for an unlabeled patch.
int dominant_class(const data::Patch& patch);

/// Throws std::invalid_argument on an empty patch set. The multi-class variant
/// trains on the dominant class and skips unlabeled patches.
ClassifierTrainResult train_classifier(std::span<const data::Patch> patches, const ClassifierConfig& cfg,
                                       const ProgressFn& progress = {});

/// Per-patch probabilities in classifier order.
std::vector<std::array<double, 3>> predict_patches(ClassifierModel& model, std::span<const data::Patch> patches);

/// Thresholded multi-label decisions; for the multi-class variant, the one-hot argmax.
std::vector<std::array<int, 3>> decide(const ClassifierModel& model, std::span<const std::array<double, 3>> p);

/// Argmax over the softmax, first index on ties.
int multiclass_baseline_forward(ClassifierModel& model, const RgbImage& patch);

/// Per-class confusion matrices (classifier order).
std::array<eval::ConfusionMatrix, 3> patch_confusions(std::span<const data::Patch> patches,
                                                      std::span<const std::array<int, 3>> decisions);

/// Mean of the defined per-class balanced accuracies.
double mean_balanced_accuracy(const std::array<eval::ConfusionMatrix, 3>& cms);

/// Start from the stage-3 masks; inside each classified tile, RoI pixels take
/// exactly the classes whose probability exceeds `threshold`.
MaskSet assemble_defect_map(const MaskSet& stage3, std::span<const data::Patch> patches,
                            std::span<const std::array<double, 3>> p, int size, double threshold = 0.5);

enum class ClassifierVariant { with_regularizer, without_regularizer, no_dfe, no_stn, multiclass };

std::string_view variant_name(ClassifierVariant v);
ClassifierConfig variant_config(const ClassifierConfig& base, ClassifierVariant v);

}  // namespace hullscan::stages
