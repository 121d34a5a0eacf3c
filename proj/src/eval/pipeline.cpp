#include "hullscan/eval/pipeline.hpp"

#include "hullscan/data/dataset_io.hpp"
#include "hullscan/eval/report.hpp"
#include "hullscan/raster/transform.hpp"

namespace hullscan::eval {

namespace {

template <typename F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const NoShipError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

template <typename Model>
Model load_stage(const std::string& stage, const fs::path& path) {
  if (path.empty()) throw StageError(stage, "no checkpoint configured");
  if (!fs::exists(path)) throw StageError(stage, "checkpoint not found: " + path.string());
  return in_stage(stage, [&] { return Model::load(path); });
}

}  // namespace

PipelineModels PipelineModels::load(const PipelineConfig& cfg) {
  PipelineModels m{load_stage<stages::ShipSegModel>("stage1", cfg.ship_checkpoint),
                   load_stage<stages::SectionModel>("stage2", cfg.section_checkpoint),
                   load_stage<stages::DefectSegModel>("stage3", cfg.defect_checkpoint),
                   load_stage<stages::ClassifierModel>("stage4", cfg.classifier_checkpoint)};
  if (cfg.ship_threshold) m.ship.config.threshold = *cfg.ship_threshold;
  if (cfg.defect_threshold) m.defects.config.threshold = *cfg.defect_threshold;
  if (cfg.cls_threshold) m.classifier.config.threshold = *cfg.cls_threshold;
  if (cfg.roi_thresh) m.classifier.config.roi_thresh = *cfg.roi_thresh;
  return m;
}

PipelineResult run_pipeline(PipelineModels& models, const RgbImage& image, const std::string& image_id,
                            const PipelineConfig& cfg) {
  PipelineResult result;
  result.report.image_id = image_id;
  try {
    result.ship = in_stage("stage1", [&] { return stages::segment_ship(models.ship, image); });
  } catch (const NoShipError& e) {
    result.report.diagnostic = std::string("no ship detected: ") + e.what();
    result.defect_overlay = image;
    result.section_overlay = image;
    result.ship = BinaryMask(image.rows(), image.cols());
    result.sections = SectionMap(image.rows(), image.cols(), Section::background);
    result.defects = MaskSet(image.rows(), image.cols());
    return result;
  }

  const CroppedShip crop = crop_resize_ship(image, result.ship);
  const BinaryMask frame_ship = crop_mask(result.ship, crop.transform);

  const BoundaryPair boundaries =
      in_stage("stage2", [&] { return stages::predict_boundaries(models.sections, crop.image, frame_ship); });
  result.boundaries = boundaries;
  const SectionMap frame_sections = boundaries_to_section_map(frame_ship, boundaries);

  const MaskSet stage3 = in_stage("stage3", [&] {
    return maskset_restrict(stages::segment_defects(models.defects, crop.image).masks, frame_ship);
  });

  const MaskSet assembled = in_stage("stage4", [&] {
    data::ImageRecord frame;
    frame.id = image_id;
    frame.pixels = crop.image;
    const auto& cc = models.classifier.config;
    const auto patches = data::select_cls_patches(frame, stage3.any(), cc.net.patch, cc.roi_thresh);
    const auto p = stages::predict_patches(models.classifier, patches);
    for (std::size_t i = 0; i < patches.size(); ++i) {
      result.patch_dump.push_back({{"origin", {patches[i].row, patches[i].col}},
                                   {"roi_ratio", patches[i].roi_ratio},
                                   {"p1", p[i][0]},
                                   {"p2", p[i][1]},
                                   {"p3", p[i][2]}});
    }
    if (cc.net.multiclass) {
      std::vector<std::array<double, 3>> onehot;
      for (const auto& d : stages::decide(models.classifier, p)) onehot.push_back({double(d[0]), double(d[1]), double(d[2])});
      return stages::assemble_defect_map(stage3, patches, onehot, cc.net.patch, 0.5);
    }
    return stages::assemble_defect_map(stage3, patches, p, cc.net.patch, cc.threshold);
  });

  result.sections = uncrop_sections(frame_sections, crop.transform);
  MaskSet defects = maskset_restrict(uncrop_maskset(assembled, crop.transform), result.ship);
  if (cfg.suppress_ts_fouling) defects = suppress_ts_fouling(result.sections, defects);
  result.defects = defects;
  result.report = coverage(result.sections, result.defects, image_id);
  result.defect_overlay = render_defect_overlay(image, result.defects);
  result.section_overlay = render_section_overlay(image, result.sections);
  return result;
}

void write_pipeline_outputs(const fs::path& dir, const PipelineResult& result) {
  fs::create_directories(dir);
  const std::string& id = result.report.image_id;
  write_text(dir / (id + ".json"), report_to_json(result.report).dump(2) + "\n");
  write_text(dir / (id + ".csv"), coverage_csv_header() + "\n" + report_csv_row(result.report) + "\n");
  write_text(dir / (id + "_patches.json"), result.patch_dump.dump(2) + "\n");
  data::write_image(dir / (id + "_defects.png"), result.defect_overlay);
  data::write_image(dir / (id + "_sections.png"), result.section_overlay);
  data::write_section_map(dir / (id + "_sections_map.png"), result.sections);
}

}  // namespace hullscan::eval
