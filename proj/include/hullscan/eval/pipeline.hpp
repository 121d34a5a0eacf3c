#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hullscan/raster/coverage.hpp"
#include "hullscan/stages/classifier_training.hpp"
#include "hullscan/stages/defect_segmenter.hpp"
#include "hullscan/stages/section_model.hpp"
#include "hullscan/stages/ship_segmenter.hpp"

namespace hullscan::eval {

namespace fs = std::filesystem;

/// A pipeline stage failed; `stage()` names it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  fs::path ship_checkpoint;
  fs::path section_checkpoint;
  fs::path defect_checkpoint;
  fs::path classifier_checkpoint;
  /// Overrides of the thresholds stored in the checkpoints.
  std::optional<double> ship_threshold;
  std::optional<double> defect_threshold;
  std::optional<double> cls_threshold;
  std::optional<double> roi_thresh;
  bool suppress_ts_fouling = true;
  fs::path output_dir;
};

struct PipelineModels {
  stages::ShipSegModel ship;
  stages::SectionModel sections;
  stages::DefectSegModel defects;
  stages::ClassifierModel classifier;

  /// Loads and shape-checks all four checkpoints. Throws StageError naming the
  /// first stage whose checkpoint is missing or invalid.
  static PipelineModels load(const PipelineConfig& cfg);
};

struct PipelineResult {
  DefectReport report;
  RgbImage defect_overlay;
  RgbImage section_overlay;
  /// Rasters at the input resolution.
  BinaryMask ship;
  SectionMap sections;
  MaskSet defects;
  /// Boundaries in the ship frame.
  std::optional<BoundaryPair> boundaries;
  /// One entry per classified tile: {origin, roi_ratio, p1, p2, p3}.
  nlohmann::json patch_dump = nlohmann::json::array();
};

/// Ship mask, boundaries, section map, RoI masks, patch classification, map
/// assembly, TS fouling suppression and coverage. A missing ship yields an
/// empty report carrying a diagnostic; other failures throw StageError.
PipelineResult run_pipeline(PipelineModels& models, const RgbImage& image, const std::string& image_id,
                            const PipelineConfig& cfg);

/// Writes <dir>/<id>.json, <id>.csv, <id>_defects.png, <id>_sections.png,
/// <id>_sections_map.png and <id>_patches.json.
void write_pipeline_outputs(const fs::path& dir, const PipelineResult& result);

}  // namespace hullscan::eval
