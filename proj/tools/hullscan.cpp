#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hullscan/data/dataset_io.hpp"
#include "hullscan/eval/report.hpp"
#include "hullscan/eval/workflow.hpp"
#include "hullscan/nn/checkpoint.hpp"

using namespace hullscan;
namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitStage = 3;

struct Options {
  fs::path data = "data";
  fs::path out = "runs";
  fs::path models;
  std::uint64_t seed = 7;
  int scenes = 200;
  double label_dropout = 0.3;
  double overlap_bias = 0.0;
  int epochs_ship = -1, epochs_section = -1, epochs_teacher = -1, epochs_student = -1, epochs_classifier = -1;
  int max_steps = 0;
  int section_multiplier = -1;
  std::string fusion = "union";
  double lambda = 1.0;
  std::string defect_model = "student";
  bool no_suppress = false;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  int overlap_scenes = 100;
  bool quiet = false;
};

eval::DeskSettings settings_from(const Options& o) {
  auto s = eval::desk_settings();
  eval::set_seed(s, o.seed);
  s.scenes = o.scenes;
  s.corpus.label_dropout = o.label_dropout;
  s.corpus.overlap_bias = o.overlap_bias;
  if (o.epochs_ship >= 0) s.ship.train.epochs = o.epochs_ship;
  if (o.epochs_section >= 0) s.section.train.epochs = o.epochs_section;
  if (o.epochs_teacher >= 0) s.teacher.train.epochs = o.epochs_teacher;
  if (o.epochs_student >= 0) s.student.train.epochs = o.epochs_student;
  if (o.epochs_classifier >= 0) s.classifier.train.epochs = o.epochs_classifier;
  if (o.section_multiplier >= 0) s.section_multiplier = o.section_multiplier;
  for (auto* t : {&s.ship.train, &s.section.train, &s.teacher.train, &s.student.train, &s.classifier.train})
    t->max_steps = o.max_steps;
  s.fusion = eval::parse_fusion(o.fusion);
  s.classifier.loss.lambda = o.lambda;
  return s;
}

fs::path models_dir(const Options& o) { return o.models.empty() ? o.out : o.models; }

stages::ProgressFn progress(const Options& o) {
  if (o.quiet) return {};
  return [](const std::string& m) { std::cerr << m << "\n"; };
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  fs::create_directories(path.parent_path());
  eval::write_text(path, j.dump(2) + "\n");
}

nlohmann::json history_json(const stages::TrainHistory& h) {
  return {{"epoch_loss", h.epoch_loss}, {"step_loss", h.step_loss}};
}

eval::PipelineConfig pipeline_config(const Options& o) {
  eval::PipelineConfig cfg;
  const fs::path m = models_dir(o);
  cfg.ship_checkpoint = m / "stage1.ckpt";
  cfg.section_checkpoint = m / "stage2.ckpt";
  cfg.defect_checkpoint = m / (o.defect_model + ".ckpt");
  cfg.classifier_checkpoint = m / "classifier.ckpt";
  cfg.suppress_ts_fouling = !o.no_suppress;
  return cfg;
}

void train(const Options& o, const std::string& stage) {
  const auto s = settings_from(o);
  const auto log = progress(o);
  fs::create_directories(o.out);
  nlohmann::json info = {{"stage", stage}, {"settings", eval::to_json(s)}};
  if (stage == "stage1") {
    auto r = eval::train_stage1(o.data, s, log);
    r.model.save(o.out / "stage1.ckpt");
    info["history"] = history_json(r.history);
  } else if (stage == "stage2") {
    auto r = eval::train_stage2(o.data, s, log);
    r.model.save(o.out / "stage2.ckpt");
    info["history"] = history_json(r.history);
  } else if (stage == "teacher") {
    auto r = eval::train_teacher_stage(o.data, s, log);
    r.model.save(o.out / "teacher.ckpt");
    info["history"] = history_json(r.history);
  } else if (stage == "student") {
    auto teacher = stages::DefectSegModel::load(models_dir(o) / "teacher.ckpt");
    auto r = eval::train_student_stage(o.data, teacher, s, log);
    r.model.save(o.out / "student.ckpt");
    info["history"] = history_json(r.history);
  } else if (stage == "classifier") {
    auto r = eval::train_classifier_stage(o.data, s.classifier, log);
    r.model.save(o.out / "classifier.ckpt");
    info["history"] = history_json(r.history);
    info["epoch_mean_abs_cos"] = r.epoch_mean_abs_cos;
  } else {
    throw std::invalid_argument("unknown stage '" + stage + "'");
  }
  write_json(o.out / (stage + "_history.json"), info);
}

void infer(const Options& o, const fs::path& input) {
  std::vector<fs::path> images;
  if (fs::is_directory(input)) {
    for (const auto& e : fs::recursive_directory_iterator(input))
      if (e.is_regular_file() && e.path().extension() == ".png") images.push_back(e.path());
    std::sort(images.begin(), images.end());
    // A dataset tree holds masks next to each image.png; keep only the images.
    const bool dataset = std::any_of(images.begin(), images.end(), [](const fs::path& p) { return p.filename() == "image.png"; });
    if (dataset) std::erase_if(images, [](const fs::path& p) { return p.filename() != "image.png"; });
  } else if (fs::exists(input)) {
    images.push_back(input);
  } else {
    throw std::invalid_argument("no such image or directory: " + input.string());
  }
  if (images.empty()) throw std::invalid_argument("no .png images under " + input.string());

  auto cfg = pipeline_config(o);
  auto models = eval::PipelineModels::load(cfg);
  std::vector<DefectReport> reports;
  for (const auto& path : images) {
    std::string id = path.stem().string();
    // Dataset layout: <split>/<id>/image.png
    if (id == "image") id = path.parent_path().filename().string();
    auto res = eval::run_pipeline(models, data::read_image(path), id, cfg);
    eval::write_pipeline_outputs(o.out, res);
    if (!res.report.diagnostic.empty()) std::cerr << id << ": " << res.report.diagnostic << "\n";
    reports.push_back(res.report);
  }
  const auto table = eval::aggregate_reports(reports);
  write_json(o.out / "table.json", eval::table_to_json(table));
  eval::write_text(o.out / "table.csv", eval::table_to_csv(table));
}

void evaluate(const Options& o, const std::string& split_name) {
  const auto split = data::parse_split(split_name);
  const auto records = eval::load_split(o.data, split);
  if (records.empty()) throw std::invalid_argument("split '" + split_name + "' is empty");
  auto cfg = pipeline_config(o);
  auto models = eval::PipelineModels::load(cfg);
  const fs::path dir = o.out / ("eval_" + split_name);
  cfg.output_dir = dir / "reports";

  nlohmann::json m;
  m["ship_iou"] = eval::evaluate_ship(models.ship, records);
  m["sections"] = eval::to_json(eval::evaluate_sections(models.sections, records));
  m["defects"] = eval::to_json(eval::evaluate_defects(models.defects, records));
  const auto frames = eval::ship_frames(records);
  const auto& cc = models.classifier.config;
  const auto patches = eval::label_roi_patches(frames, cc.net.patch, cc.roi_thresh);
  if (!patches.empty()) m["classifier"] = eval::to_json(eval::evaluate_classifier(models.classifier, patches));
  const auto e2e = eval::evaluate_pipeline(models, o.data, records, cfg);
  m["coverage_pass_fraction"] = e2e.pass_fraction;
  m["coverage_max_abs_error"] = e2e.max_abs_error;
  write_json(dir / "metrics.json", m);
  write_json(dir / "table.json", eval::table_to_json(e2e.table));
  eval::write_text(dir / "table.csv", eval::table_to_csv(e2e.table));
  std::cout << m.dump(2) << "\n";
}

void ablate(const Options& o, const std::string& what) {
  auto s = settings_from(o);
  const auto log = progress(o);
  const fs::path dir = o.out / ("ablate_" + what);
  nlohmann::json out = {{"ablation", what}, {"settings", eval::to_json(s)}};

  if (what == "fusion") {
    auto teacher = stages::DefectSegModel::load(models_dir(o) / "teacher.ckpt");
    const auto test = eval::load_split(o.data, data::Split::test);
    out["teacher"] = eval::to_json(eval::evaluate_defects(teacher, test));
    for (const auto mode : {stages::FusionMode::none, stages::FusionMode::union_, stages::FusionMode::intersection}) {
      s.fusion = mode;
      auto r = eval::train_student_stage(o.data, teacher, s, log);
      out[std::string(eval::fusion_name(mode))] = eval::to_json(eval::evaluate_defects(r.model, test));
    }
    write_json(dir / "results.json", out);
    std::cout << out.dump(2) << "\n";
    return;
  }

  std::vector<stages::ClassifierVariant> variants;
  if (what == "dfe") {
    variants = {stages::ClassifierVariant::with_regularizer, stages::ClassifierVariant::without_regularizer,
                stages::ClassifierVariant::no_dfe};
  } else if (what == "stn") {
    variants = {stages::ClassifierVariant::with_regularizer, stages::ClassifierVariant::no_stn};
  } else if (what == "multiclass") {
    variants = {stages::ClassifierVariant::with_regularizer, stages::ClassifierVariant::multiclass};
  } else {
    throw std::invalid_argument("unknown ablation '" + what + "'");
  }
  const auto& cc = s.classifier;
  const auto train_frames = eval::ship_frames(eval::load_split(o.data, data::Split::train));
  const auto train = eval::label_roi_patches(train_frames, cc.net.patch, cc.roi_thresh);
  std::vector<data::Patch> test;
  if (what == "multiclass") {
    test = eval::overlap_test_patches(o.overlap_scenes, o.seed + 1000, 0.8, cc.net.patch, cc.roi_thresh);
  } else {
    test = eval::label_roi_patches(eval::ship_frames(eval::load_split(o.data, data::Split::test)), cc.net.patch,
                                   cc.roi_thresh);
  }
  const auto runs = eval::ablate_classifier(train, test, cc, variants, o.seeds, log);
  auto rows = nlohmann::json::array();
  for (const auto& r : runs) {
    rows.push_back({{"variant", stages::variant_name(r.variant)},
                    {"seed", r.seed},
                    {"scores", eval::to_json(r.scores)},
                    {"epoch_mean_abs_cos", r.epoch_mean_abs_cos}});
  }
  out["runs"] = rows;
  out["train_patches"] = train.size();
  out["test_patches"] = test.size();
  write_json(dir / "results.json", out);
  std::cout << rows.dump(2) << "\n";
}

void report(const Options& o, const fs::path& dir) {
  std::vector<DefectReport> reports;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.path().extension() == ".json" && name.find("_patches") == std::string::npos && name != "table.json")
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    reports.push_back(eval::report_from_json(nlohmann::json::parse(in)));
  }
  if (reports.empty()) throw std::invalid_argument("no report JSON files in " + dir.string());
  std::string csv = eval::coverage_csv_header() + "\n";
  for (const auto& r : reports) csv += eval::report_csv_row(r) + "\n";
  fs::create_directories(o.out);
  eval::write_text(o.out / "reports.csv", csv);
  const auto table = eval::aggregate_reports(reports);
  write_json(o.out / "table.json", eval::table_to_json(table));
  eval::write_text(o.out / "table.csv", eval::table_to_csv(table));
  std::cout << eval::table_to_csv(table);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hull inspection pipeline: ship, section and defect segmentation with patch classification"};
  app.set_config("--config", "", "key = value settings file");
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--data", o.data, "dataset root");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--models", o.models, "checkpoint directory (defaults to --out)");
  app.add_option("--seed", o.seed, "seed for data generation and training");
  app.add_option("--scenes", o.scenes, "number of generated scenes")->check(CLI::PositiveNumber);
  app.add_option("--label-dropout", o.label_dropout, "fraction of train blobs left unlabeled")->check(CLI::Range(0.0, 1.0));
  app.add_option("--overlap-bias", o.overlap_bias, "chance a blob is centred on another class")->check(CLI::Range(0.0, 1.0));
  app.add_option("--epochs-ship", o.epochs_ship);
  app.add_option("--epochs-section", o.epochs_section);
  app.add_option("--epochs-teacher", o.epochs_teacher);
  app.add_option("--epochs-student", o.epochs_student);
  app.add_option("--epochs-classifier", o.epochs_classifier);
  app.add_option("--max-steps", o.max_steps, "stop every training run after this many steps (0: no limit)");
  app.add_option("--section-multiplier", o.section_multiplier, "augmented copies per section sample");
  app.add_option("--fusion", o.fusion, "student label fusion")->check(CLI::IsMember({"none", "union", "intersection"}));
  app.add_option("--lambda", o.lambda, "weight of the feature decorrelation term");
  app.add_option("--defect-model", o.defect_model, "stage-3 checkpoint used by infer/evaluate")
      ->check(CLI::IsMember({"teacher", "student"}));
  app.add_flag("--no-suppress", o.no_suppress, "keep fouling on the top side");
  app.add_option("--seeds", o.seeds, "classifier ablation seeds");
  app.add_option("--overlap-scenes", o.overlap_scenes, "scenes in the overlapping-defect test corpus");
  app.add_flag("-q,--quiet", o.quiet);

  auto* gen = app.add_subcommand("generate-data", "write a synthetic corpus to --out");
  std::string stage;
  auto* tr = app.add_subcommand("train", "train one stage from --data into --out");
  tr->add_option("stage", stage)->required()->check(CLI::IsMember({"stage1", "stage2", "teacher", "student", "classifier"}));
  fs::path input;
  auto* inf = app.add_subcommand("infer", "run the pipeline on an image or a directory of images");
  inf->add_option("input", input)->required();
  std::string split;
  auto* ev = app.add_subcommand("evaluate", "score every stage and the coverage reports on a split");
  ev->add_option("split", split)->required()->check(CLI::IsMember({"train", "val", "test"}));
  std::string what;
  auto* ab = app.add_subcommand("ablate", "train and compare ablation variants");
  ab->add_option("what", what)->required()->check(CLI::IsMember({"dfe", "stn", "fusion", "multiclass"}));
  fs::path report_dir;
  auto* rep = app.add_subcommand("report", "aggregate per-image report JSONs into the section table");
  rep->add_option("dir", report_dir)->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (gen->parsed()) {
      data::CorpusOptions c;
      c.label_dropout = o.label_dropout;
      c.overlap_bias = o.overlap_bias;
      eval::generate_dataset(o.out, o.scenes, o.seed, c);
    } else if (tr->parsed()) {
      train(o, stage);
    } else if (inf->parsed()) {
      infer(o, input);
    } else if (ev->parsed()) {
      evaluate(o, split);
    } else if (ab->parsed()) {
      ablate(o, what);
    } else if (rep->parsed()) {
      report(o, report_dir);
    }
  } catch (const eval::StageError& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return kExitStage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const data::DatasetError& e) {
    std::cerr << "dataset error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nn::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
  return 0;
}
