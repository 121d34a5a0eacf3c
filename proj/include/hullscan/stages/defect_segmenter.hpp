#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "hullscan/data/patches.hpp"
#include "hullscan/stages/train_util.hpp"

namespace hullscan::stages {

inline constexpr const char* kDefectArchitecture = "hullscan.defect_unet.v1";

enum class ModelRole { teacher, student };

std::string_view role_name(ModelRole r);
ModelRole parse_role(std::string_view s);

struct DefectSegConfig {
  nn::UNetOptions net;  ///< classes is forced to 3
  TrainConfig train;
  int patch = 224;
  double min_defect_frac = 0.01;
  double threshold = 0.5;
  /// Weight of the soft Dice term added to the pixel BCE; 0 gives plain BCE.
  double dice_weight = 1.0;
};

/// Per-class soft Dice loss averaged over classes; the batch is pooled.
torch::Tensor soft_dice_loss(const torch::Tensor& logits, const torch::Tensor& target, double smooth = 1.0);

struct DefectSegModel {
  nn::UNet net{nullptr};
  ModelRole role = ModelRole::teacher;
  DefectSegConfig config;

  explicit DefectSegModel(const DefectSegConfig& cfg = {}, ModelRole role = ModelRole::teacher);
  void save(const std::filesystem::path& path);
  static DefectSegModel load(const std::filesystem::path& path);
};

struct DefectTrainResult {
  DefectSegModel model;
  TrainHistory history;
};

/// Per-pixel, per-class binary cross-entropy (plus weighted soft Dice) on
/// segmentation patches.
/// Throws std::invalid_argument on an empty patch set.
DefectTrainResult train_defect_segmenter(std::span<const data::Patch> patches, const DefectSegConfig& cfg,
                                         ModelRole role, const ProgressFn& progress = {});
DefectTrainResult train_teacher(std::span<const data::Patch> patches, const DefectSegConfig& cfg,
                                const ProgressFn& progress = {});
DefectTrainResult train_student(std::span<const data::Patch> patches, const DefectSegConfig& cfg,
                                const ProgressFn& progress = {});

/// Segmentation patches for every record with defect masks.
std::vector<data::Patch> seg_patches(std::span<const data::ImageRecord> records, const DefectSegConfig& cfg);

/// Per-class probabilities [3, rows, cols] stitched from non-overlapping tiles.
torch::Tensor defect_probabilities(DefectSegModel& model, const RgbImage& image);

struct DefectSegmentation {
  MaskSet masks;
  /// Union of the class masks.
  BinaryMask roi;
};

DefectSegmentation segment_defects(DefectSegModel& model, const RgbImage& image);

/// Thresholded teacher predictions for one image.
MaskSet pseudo_label(DefectSegModel& teacher, const RgbImage& image);

/// Per-class union.
MaskSet fuse_labels(const MaskSet& human, const MaskSet& pseudo);

/// Ablation: inside tiles where fouling makes up more than half of the human
/// defect pixels, keep only pixels both sources agree on; elsewhere keep the
/// human labels. The result is a subset of `human`.
MaskSet fuse_labels_intersection(const MaskSet& human, const MaskSet& pseudo, int tile = 224);

enum class FusionMode { none, union_, intersection };

/// Records with labels replaced by the fused ones (restricted to the ship mask).
std::vector<data::ImageRecord> fuse_dataset(DefectSegModel& teacher, std::span<const data::ImageRecord> records,
                                            FusionMode mode);

}  // namespace hullscan::stages
