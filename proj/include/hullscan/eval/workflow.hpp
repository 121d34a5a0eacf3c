#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hullscan/data/dataset_io.hpp"
#include "hullscan/data/scene.hpp"
#include "hullscan/eval/pipeline.hpp"
#include "hullscan/raster/transform.hpp"

namespace hullscan::eval {

/// Every knob of the desk-scale experiments. Defaults fit a single CPU core
/// within the per-stage training budget.
struct DeskSettings {
  int scenes = 200;
  data::CorpusOptions corpus;
  stages::ShipSegConfig ship;
  stages::SectionModelConfig section;
  int section_multiplier = 1;
  AugmentRanges augment;
  stages::DefectSegConfig teacher;
  stages::DefectSegConfig student;
  stages::FusionMode fusion = stages::FusionMode::union_;
  stages::ClassifierConfig classifier;
  std::uint64_t seed = 7;
};

DeskSettings desk_settings();
/// Sets the seed of every training run (and the corpus seed).
void set_seed(DeskSettings& s, std::uint64_t seed);
nlohmann::json to_json(const DeskSettings& s);

std::string_view fusion_name(stages::FusionMode m);
stages::FusionMode parse_fusion(std::string_view s);

/// Writes a generated corpus under `root`, plus truth/<id>.json with the
/// coverage of the complete (undropped) defect masks on the true sections.
void generate_dataset(const fs::path& root, int count, std::uint64_t seed, const data::CorpusOptions& options);

std::vector<data::ImageRecord> load_split(const fs::path& root, data::Split split);
DefectReport load_truth(const fs::path& root, const std::string& id);

/// Records cropped to their ground-truth ship frame.
std::vector<data::ImageRecord> ship_frames(std::span<const data::ImageRecord> records);

/// Classification tiles of ship frames, using the union of the labelled
/// defect masks as RoI.
std::vector<data::Patch> label_roi_patches(std::span<const data::ImageRecord> frames, int size, double roi_thresh);

stages::ShipTrainResult train_stage1(const fs::path& root, const DeskSettings& s, const stages::ProgressFn& progress = {});
stages::SectionTrainResult train_stage2(const fs::path& root, const DeskSettings& s,
                                        const stages::ProgressFn& progress = {});
stages::DefectTrainResult train_teacher_stage(const fs::path& root, const DeskSettings& s,
                                              const stages::ProgressFn& progress = {});
stages::DefectTrainResult train_student_stage(const fs::path& root, stages::DefectSegModel& teacher,
                                              const DeskSettings& s, const stages::ProgressFn& progress = {});
stages::ClassifierTrainResult train_classifier_stage(const fs::path& root, const stages::ClassifierConfig& cfg,
                                                     const stages::ProgressFn& progress = {});

/// Mean per-image IoU of the predicted ship mask.
double evaluate_ship(stages::ShipSegModel& model, std::span<const data::ImageRecord> records);

struct SectionScores {
  /// Mean per-image IoU of TS, BT, VS over the images containing each section.
  std::array<std::optional<double>, 3> iou{};
  /// Mean |predicted - true| boundary position over valid columns (normalized).
  double column_error = 0.0;
};
/// Boundaries predicted on ground-truth ship frames.
SectionScores evaluate_sections(stages::SectionModel& model, std::span<const data::ImageRecord> records);

struct DefectScores {
  /// Pooled over all images, Defect order.
  std::array<std::optional<double>, 3> iou{};
  std::array<std::optional<double>, 3> recall{};
  std::optional<double> overall_recall;
};
/// Stage-3 masks on ground-truth ship frames against the record labels.
DefectScores evaluate_defects(stages::DefectSegModel& model, std::span<const data::ImageRecord> records);

struct ClassifierScores {
  std::array<ConfusionMatrix, 3> confusion{};
  /// Classifier order: corrosion, fouling, delamination.
  std::array<std::optional<double>, 3> balanced_accuracy{};
  double mean_balanced_accuracy = 0.0;
};
ClassifierScores evaluate_classifier(stages::ClassifierModel& model, std::span<const data::Patch> patches);

struct EndToEndScores {
  std::vector<DefectReport> reports;
  /// Largest |predicted - true| coverage over the cells of sections present in
  /// the truth, per image (an absent predicted section reads as 0%).
  std::vector<double> max_abs_error;
  /// Images whose every cell lies within the tolerance.
  double pass_fraction = 0.0;
  CoverageTable table;
};

/// Runs the full pipeline on every record, writing per-image outputs to
/// cfg.output_dir when it is set.
EndToEndScores evaluate_pipeline(PipelineModels& models, const fs::path& root, std::span<const data::ImageRecord> records,
                                 const PipelineConfig& cfg, double tolerance_pp = 2.0);

struct VariantRun {
  stages::ClassifierVariant variant = stages::ClassifierVariant::with_regularizer;
  std::uint64_t seed = 0;
  ClassifierScores scores;
  std::vector<double> epoch_mean_abs_cos;
};

/// Trains every variant for every seed on the same training patches and scores
/// each on `test`.
std::vector<VariantRun> ablate_classifier(std::span<const data::Patch> train, std::span<const data::Patch> test,
                                          const stages::ClassifierConfig& base,
                                          std::span<const stages::ClassifierVariant> variants,
                                          std::span<const std::uint64_t> seeds,
                                          const stages::ProgressFn& progress = {});

/// Label-RoI classification tiles of an in-memory corpus whose blobs tend to
/// sit on top of each other (held-out splits only).
std::vector<data::Patch> overlap_test_patches(int scenes, std::uint64_t seed, double overlap_bias, int size,
                                              double roi_thresh);

nlohmann::json to_json(const ClassifierScores& s);
nlohmann::json to_json(const DefectScores& s);
nlohmann::json to_json(const SectionScores& s);

}  // namespace hullscan::eval
