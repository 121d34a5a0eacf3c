#include "hullscan/eval/workflow.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "hullscan/eval/report.hpp"

namespace hullscan::eval {

namespace {

nn::UNetOptions desk_unet(std::array<int, 5> decoder) {
  nn::UNetOptions o;
  o.encoder.base_width = 8;
  o.decoder = decoder;
  return o;
}

stages::TrainConfig desk_train(int epochs, int batch, double lr) {
  stages::TrainConfig t;
  t.epochs = epochs;
  t.batch_size = batch;
  t.lr = lr;
  t.final_lr_fraction = 0.1;
  return t;
}

void accumulate(std::array<double, 3>& inter, std::array<double, 3>& uni, std::array<double, 3>& truth,
                const MaskSet& pred, const MaskSet& gt) {
  for (int k = 0; k < 3; ++k) {
    const double i = static_cast<double>(overlap_count(pred.masks[k], gt.masks[k]));
    inter[k] += i;
    uni[k] += static_cast<double>(pred.masks[k].count() + gt.masks[k].count()) - i;
    truth[k] += static_cast<double>(gt.masks[k].count());
  }
}

}  // namespace

DeskSettings desk_settings() {
  DeskSettings s;
  s.corpus.label_dropout = 0.3;

  s.ship.net = desk_unet({32, 24, 16, 8, 4});
  s.ship.train = desk_train(4, 2, 2e-3);

  s.section.net.encoder.base_width = 8;
  s.section.net.hidden = 64;
  s.section.train = desk_train(4, 2, 2e-3);

  s.teacher.net = desk_unet({32, 24, 16, 8, 8});
  s.teacher.train = desk_train(8, 4, 2e-3);
  s.student = s.teacher;

  auto& c = s.classifier;
  c.net.stn.channels = {8, 8, 4};
  c.net.extractor.init_features = 16;
  c.net.extractor.growth = 8;
  c.net.head = {128, 64, 32};
  c.train = desk_train(8, 16, 1e-3);
  set_seed(s, s.seed);
  return s;
}

void set_seed(DeskSettings& s, std::uint64_t seed) {
  s.seed = seed;
  s.ship.train.seed = seed;
  s.section.train.seed = seed;
  s.teacher.train.seed = seed;
  s.student.train.seed = seed + 1;
  s.classifier.train.seed = seed;
}

nlohmann::json to_json(const DeskSettings& s) {
  return {{"scenes", s.scenes},
          {"seed", s.seed},
          {"label_dropout", s.corpus.label_dropout},
          {"overlap_bias", s.corpus.overlap_bias},
          {"ship", {{"net", stages::to_json(s.ship.net)}, {"train", stages::to_json(s.ship.train)}}},
          {"section",
           {{"net", stages::to_json(s.section.net)},
            {"train", stages::to_json(s.section.train)},
            {"multiplier", s.section_multiplier}}},
          {"teacher", {{"net", stages::to_json(s.teacher.net)}, {"train", stages::to_json(s.teacher.train)}}},
          {"student",
           {{"net", stages::to_json(s.student.net)},
            {"train", stages::to_json(s.student.train)},
            {"fusion", fusion_name(s.fusion)}}},
          {"classifier",
           {{"stn", stages::to_json(s.classifier.net.stn)},
            {"extractor", stages::to_json(s.classifier.net.extractor)},
            {"use_stn", s.classifier.net.use_stn},
            {"use_dfe", s.classifier.net.use_dfe},
            {"multiclass", s.classifier.net.multiclass},
            {"lambda", s.classifier.loss.lambda},
            {"train", stages::to_json(s.classifier.train)}}}};
}

std::string_view fusion_name(stages::FusionMode m) {
  switch (m) {
    case stages::FusionMode::none: return "none";
    case stages::FusionMode::union_: return "union";
    case stages::FusionMode::intersection: return "intersection";
  }
  return "union";
}

stages::FusionMode parse_fusion(std::string_view s) {
  if (s == "none") return stages::FusionMode::none;
  if (s == "union") return stages::FusionMode::union_;
  if (s == "intersection") return stages::FusionMode::intersection;
  throw std::invalid_argument("unknown fusion mode '" + std::string(s) + "'");
}

void generate_dataset(const fs::path& root, int count, std::uint64_t seed, const data::CorpusOptions& options) {
  if (count <= 0) throw std::invalid_argument("generate_dataset: count must be positive");
  const auto corpus = data::generate_corpus(count, seed, options);
  fs::create_directories(root / "truth");
  for (const auto& g : corpus) {
    data::write_record(root, g.record, {"human", seed});
    const auto truth = coverage(g.placement.sections, g.placement.truth_masks, g.record.id);
    write_text(root / "truth" / (g.record.id + ".json"), report_to_json(truth).dump(2) + "\n");
  }
  data::write_manifest(root, data::build_manifest(root));
}

std::vector<data::ImageRecord> load_split(const fs::path& root, data::Split split) {
  const auto manifest = data::read_manifest(root);
  std::vector<data::ImageRecord> out;
  for (const auto* e : manifest.split(split)) out.push_back(data::load_record(root, *e));
  return out;
}

DefectReport load_truth(const fs::path& root, const std::string& id) {
  const fs::path path = root / "truth" / (id + ".json");
  std::ifstream in(path);
  if (!in) throw data::DatasetError("missing truth report " + path.string(), {id});
  return report_from_json(nlohmann::json::parse(in));
}

std::vector<data::ImageRecord> ship_frames(std::span<const data::ImageRecord> records) {
  std::vector<data::ImageRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(stages::to_ship_frame(r));
  return out;
}

std::vector<data::Patch> label_roi_patches(std::span<const data::ImageRecord> frames, int size, double roi_thresh) {
  std::vector<data::Patch> out;
  for (const auto& f : frames) {
    if (!f.defect_masks) continue;
    for (auto& p : data::select_cls_patches(f, f.defect_masks->any(), size, roi_thresh)) out.push_back(std::move(p));
  }
  return out;
}

stages::ShipTrainResult train_stage1(const fs::path& root, const DeskSettings& s, const stages::ProgressFn& progress) {
  const auto records = load_split(root, data::Split::train);
  return stages::train_ship_segmenter(stages::ship_samples(records), s.ship, progress);
}

stages::SectionTrainResult train_stage2(const fs::path& root, const DeskSettings& s,
                                        const stages::ProgressFn& progress) {
  std::vector<stages::SectionSample> base;
  for (const auto& r : load_split(root, data::Split::train))
    if (r.boundaries && r.ship_mask) base.push_back(stages::make_section_sample(r));
  const auto samples = stages::augment_section_dataset(base, s.section_multiplier, s.augment, s.seed);
  return stages::train_section_model(samples, s.section, progress);
}

stages::DefectTrainResult train_teacher_stage(const fs::path& root, const DeskSettings& s,
                                              const stages::ProgressFn& progress) {
  const auto frames = ship_frames(load_split(root, data::Split::train));
  return stages::train_teacher(stages::seg_patches(frames, s.teacher), s.teacher, progress);
}

stages::DefectTrainResult train_student_stage(const fs::path& root, stages::DefectSegModel& teacher,
                                              const DeskSettings& s, const stages::ProgressFn& progress) {
  const auto frames = ship_frames(load_split(root, data::Split::train));
  const auto fused = stages::fuse_dataset(teacher, frames, s.fusion);
  return stages::train_student(stages::seg_patches(fused, s.student), s.student, progress);
}

stages::ClassifierTrainResult train_classifier_stage(const fs::path& root, const stages::ClassifierConfig& cfg,
                                                     const stages::ProgressFn& progress) {
  const auto frames = ship_frames(load_split(root, data::Split::train));
  return stages::train_classifier(label_roi_patches(frames, cfg.net.patch, cfg.roi_thresh), cfg, progress);
}

double evaluate_ship(stages::ShipSegModel& model, std::span<const data::ImageRecord> records) {
  if (records.empty()) throw std::invalid_argument("evaluate_ship: no records");
  double sum = 0.0;
  for (const auto& r : records) {
    if (!r.ship_mask) throw std::invalid_argument("evaluate_ship: record without ship mask");
    try {
      sum += iou(stages::segment_ship(model, r.pixels), *r.ship_mask).value_or(0.0);
    } catch (const NoShipError&) {
    }
  }
  return sum / static_cast<double>(records.size());
}

SectionScores evaluate_sections(stages::SectionModel& model, std::span<const data::ImageRecord> records) {
  SectionScores out;
  std::array<double, 3> sum{};
  std::array<int, 3> n{};
  double err = 0.0;
  std::size_t cols = 0;
  for (const auto& r : records) {
    const auto f = stages::to_ship_frame(r);
    const auto b = stages::predict_boundaries(model, f.pixels, *f.ship_mask);
    const auto s = mean_iou(boundaries_to_section_map(*f.ship_mask, b), boundaries_to_section_map(*f.ship_mask, *f.boundaries));
    for (int k = 0; k < 3; ++k)
      if (s.per_class[k]) sum[k] += *s.per_class[k], ++n[k];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < f.boundaries->width(); ++j)
        if (f.boundaries->is_valid(i, j)) err += std::abs(b.y[i][j] - f.boundaries->y[i][j]), ++cols;
  }
  for (int k = 0; k < 3; ++k)
    if (n[k] > 0) out.iou[k] = sum[k] / n[k];
  out.column_error = cols > 0 ? err / static_cast<double>(cols) : 0.0;
  return out;
}

DefectScores evaluate_defects(stages::DefectSegModel& model, std::span<const data::ImageRecord> records) {
  std::array<double, 3> inter{}, uni{}, truth{};
  for (const auto& r : records) {
    const auto f = stages::to_ship_frame(r);
    const auto pred = maskset_restrict(stages::segment_defects(model, f.pixels).masks, *f.ship_mask);
    accumulate(inter, uni, truth, pred, *f.defect_masks);
  }
  DefectScores out;
  double tp = 0.0, t = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (uni[k] > 0) out.iou[k] = inter[k] / uni[k];
    if (truth[k] > 0) out.recall[k] = inter[k] / truth[k];
    tp += inter[k];
    t += truth[k];
  }
  if (t > 0) out.overall_recall = tp / t;
  return out;
}

ClassifierScores evaluate_classifier(stages::ClassifierModel& model, std::span<const data::Patch> patches) {
  ClassifierScores out;
  const auto p = stages::predict_patches(model, patches);
  const auto d = stages::decide(model, p);
  out.confusion = stages::patch_confusions(patches, d);
  for (int k = 0; k < 3; ++k) out.balanced_accuracy[k] = metrics(out.confusion[k]).balanced_accuracy;
  out.mean_balanced_accuracy = stages::mean_balanced_accuracy(out.confusion);
  return out;
}

EndToEndScores evaluate_pipeline(PipelineModels& models, const fs::path& root, std::span<const data::ImageRecord> records,
                                 const PipelineConfig& cfg, double tolerance_pp) {
  if (records.empty()) throw std::invalid_argument("evaluate_pipeline: no records");
  EndToEndScores out;
  std::size_t passed = 0;
  for (const auto& r : records) {
    const auto res = run_pipeline(models, r.pixels, r.id, cfg);
    if (!cfg.output_dir.empty()) write_pipeline_outputs(cfg.output_dir, res);
    const auto truth = load_truth(root, r.id);
    double worst = 0.0;
    for (int s = 0; s < 3; ++s) {
      if (!truth.sections[s].present) continue;
      for (int d = 0; d < 3; ++d) {
        const double pred = res.report.sections[s].present ? res.report.sections[s].percent[d] : 0.0;
        worst = std::max(worst, std::abs(pred - truth.sections[s].percent[d]));
      }
    }
    out.max_abs_error.push_back(worst);
    passed += worst <= tolerance_pp;
    out.reports.push_back(res.report);
  }
  out.pass_fraction = static_cast<double>(passed) / static_cast<double>(records.size());
  out.table = aggregate_reports(out.reports);
  return out;
}

std::vector<VariantRun> ablate_classifier(std::span<const data::Patch> train, std::span<const data::Patch> test,
                                          const stages::ClassifierConfig& base,
                                          std::span<const stages::ClassifierVariant> variants,
                                          std::span<const std::uint64_t> seeds, const stages::ProgressFn& progress) {
  std::vector<VariantRun> out;
  for (const auto v : variants) {
    for (const auto seed : seeds) {
      auto cfg = stages::variant_config(base, v);
      cfg.train.seed = seed;
      if (progress) progress(std::string(stages::variant_name(v)) + " seed " + std::to_string(seed));
      auto res = stages::train_classifier(train, cfg, progress);
      out.push_back({v, seed, evaluate_classifier(res.model, test), res.epoch_mean_abs_cos});
    }
  }
  return out;
}

std::vector<data::Patch> overlap_test_patches(int scenes, std::uint64_t seed, double overlap_bias, int size,
                                              double roi_thresh) {
  data::CorpusOptions o;
  o.overlap_bias = overlap_bias;
  const auto corpus = data::generate_corpus(scenes, seed, o);
  std::vector<data::ImageRecord> held_out;
  for (const auto& g : corpus)
    if (g.record.split != data::Split::train) held_out.push_back(stages::to_ship_frame(g.record));
  return label_roi_patches(held_out, size, roi_thresh);
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

template <std::size_t N>
nlohmann::json opts(const std::array<std::optional<double>, N>& a) {
  auto j = nlohmann::json::array();
  for (const auto& v : a) j.push_back(opt(v));
  return j;
}

}  // namespace

nlohmann::json to_json(const ClassifierScores& s) {
  auto cms = nlohmann::json::array();
  for (const auto& c : s.confusion) cms.push_back({{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}});
  return {{"classes", {"corrosion", "fouling", "delamination"}},
          {"confusion", cms},
          {"balanced_accuracy", opts(s.balanced_accuracy)},
          {"mean_balanced_accuracy", s.mean_balanced_accuracy}};
}

nlohmann::json to_json(const DefectScores& s) {
  return {{"classes", {"corrosion", "delamination", "fouling"}},
          {"iou", opts(s.iou)},
          {"recall", opts(s.recall)},
          {"overall_recall", opt(s.overall_recall)}};
}

nlohmann::json to_json(const SectionScores& s) {
  return {{"classes", {"TS", "BT", "VS"}}, {"iou", opts(s.iou)}, {"column_error", s.column_error}};
}

}  // namespace hullscan::eval
