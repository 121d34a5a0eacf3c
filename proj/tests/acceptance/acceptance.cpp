// Acceptance suite: prints one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "hullscan/data/scene.hpp"
#include "hullscan/eval/metrics.hpp"
#include "hullscan/eval/workflow.hpp"
#include "hullscan/nn/densenet.hpp"
#include "hullscan/nn/grad_check.hpp"
#include "hullscan/nn/horizon.hpp"
#include "hullscan/nn/losses.hpp"
#include "hullscan/nn/stn.hpp"
#include "hullscan/nn/tensor_util.hpp"

using namespace hullscan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s.precision(2);
  s << std::scientific << v;
  return s.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "undefined"; }

bool close_rel(double a, double b, double rel) {
  if (b == 0.0) return std::abs(a) <= 1e-300;
  return std::abs(a - b) <= rel * std::abs(b);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

torch::Tensor rand64(at::IntArrayRef shape) { return torch::rand(shape, torch::kFloat64); }
torch::Tensor randn64(at::IntArrayRef shape) { return torch::randn(shape, torch::kFloat64); }

// ---------------------------------------------------------------------------
// Oracles, written against the formulas rather than the library.

double oracle_range_aware(const torch::Tensor& pred, const torch::Tensor& target, const torch::Tensor& mask) {
  auto p = pred.contiguous(), t = target.contiguous(), m = mask.contiguous();
  const double* pp = p.data_ptr<double>();
  const double* tp = t.data_ptr<double>();
  const double* mp = m.data_ptr<double>();
  double sum = 0.0;
  for (std::int64_t i = 0; i < p.numel(); ++i)
    if (mp[i] != 0.0) sum += std::abs(tp[i] - pp[i]);
  return sum;
}

double oracle_bce(double l, double p, double clamp) {
  p = std::min(std::max(p, clamp), 1.0 - clamp);
  return -(l * std::log(p) + (1.0 - l) * std::log(1.0 - p));
}

double oracle_cos(const std::vector<double>& x, const std::vector<double>& y, double eps) {
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  return dot / std::max(std::sqrt(nx) * std::sqrt(ny), eps);
}

std::vector<double> row(const torch::Tensor& t, std::int64_t i) {
  auto r = t[i].contiguous();
  return {r.data_ptr<double>(), r.data_ptr<double>() + r.numel()};
}

double oracle_cls_loss(const torch::Tensor& labels, const torch::Tensor& p, const torch::Tensor& fg,
                       const torch::Tensor& fd, const nn::ClsLossConfig& cfg) {
  const auto n = labels.size(0);
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k)
      s += cfg.w[k] * oracle_bce(labels[i][k].item<double>(), p[i][k].item<double>(), cfg.prob_clamp);
    s += cfg.lambda * std::abs(oracle_cos(row(fg, i), row(fd, i), cfg.eps));
    total += s;
  }
  return total / static_cast<double>(n);
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  torch::manual_seed(101);
  std::mt19937_64 rng(101);
  const double tol = 1e-9;
  int bad = 0, cases = 0;

  for (int t = 0; t < 25; ++t, ++cases) {
    const int w = 1 + t % 9;
    const auto pred = rand64({2, 2, w}), target = rand64({2, 2, w});
    const auto mask = (torch::rand({2, 2, w}) > 0.4).to(torch::kFloat64);
    bad += !close_rel(nn::range_aware_loss(pred, target, mask).item<double>(), oracle_range_aware(pred, target, mask), tol);
  }
  o.note("range_aware_loss " + std::to_string(cases) + " inputs");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 25; ++t, ++cases) {
    const double l = t % 2, p = unit(rng);
    bad += !close_rel(nn::bce(l, p), oracle_bce(l, p, 1e-7), tol);
    const auto lt = torch::tensor({l}, torch::kFloat64), pt = torch::tensor({p}, torch::kFloat64);
    bad += !close_rel(nn::bce(lt, pt)[0].item<double>(), oracle_bce(l, p, 1e-7), tol);
  }
  o.note("bce 25 inputs");

  for (int t = 0; t < 25; ++t, ++cases) {
    const int n = 1 + t % 4, f = 2 + t % 5;
    nn::ClsLossConfig cfg;
    cfg.w = {0.5 + unit(rng), 0.5 + 2 * unit(rng), 0.5 + 4 * unit(rng)};
    cfg.lambda = 2.0 * unit(rng);
    const auto labels = (torch::rand({n, 3}) > 0.5).to(torch::kFloat64);
    const auto p = rand64({n, 3}) * 0.98 + 0.01;
    const auto fg = randn64({n, f}), fd = randn64({n, f});
    bad += !close_rel(nn::classification_loss(labels, p, fg, fd, cfg).item<double>(),
                      oracle_cls_loss(labels, p, fg, fd, cfg), tol);
  }
  o.note("classification_loss 25 inputs");

  for (int t = 0; t < 25; ++t, ++cases) {
    const int d = 1 + t % 10;
    const auto x = randn64({1, d}), y = randn64({1, d});
    const double expect = oracle_cos(row(x, 0), row(y, 0), 1e-4);
    bad += !close_rel(nn::cosine_similarity(x, y)[0].item<double>(), expect, tol);
    bad += !close_rel(nn::cosine_similarity(row(x, 0), row(y, 0)), expect, tol);
  }
  o.note("cosine_similarity 25 inputs");
  o.require(bad == 0, std::to_string(bad) + " mismatches beyond 1e-9 relative");
  return o;
}

Outcome criterion2() {
  Outcome o;
  torch::manual_seed(202);
  int changed = 0;
  for (int t = 0; t < 100; ++t) {
    const int w = 1 + t % 17;
    const auto pred = rand64({2, 2, w}), target = rand64({2, 2, w});
    const auto mask = (torch::rand({2, 2, w}) > 0.5).to(torch::kFloat64);
    const auto moved = pred + (1.0 - mask) * randn64({2, 2, w}) * 10.0;
    const double a = nn::range_aware_loss(pred, target, mask).item<double>();
    const double b = nn::range_aware_loss(moved, target, mask).item<double>();
    changed += a != b;
  }
  o.require(changed == 0, std::to_string(changed) + " of 100 perturbations changed the loss");
  return o;
}

Outcome criterion3() {
  Outcome o;
  torch::manual_seed(303);
  nn::GradCheckOptions gopt;

  auto suite = [&](const std::string& name, int runs, const std::function<nn::GradCheckReport(int)>& one) {
    int failed = 0;
    double worst = 0.0;
    for (int r = 0; r < runs; ++r) {
      const auto rep = one(r);
      failed += !rep.passed;
      worst = std::max(worst, rep.max_rel_error);
    }
    o.require(failed == 0, name + ": " + std::to_string(runs - failed) + "/" + std::to_string(runs) +
                               " passed, worst rel err " + sci(worst));
  };

  suite("height_compress", 5, [&](int) {
    nn::HeightCompress m(2, 3);
    m->to(torch::kFloat64);
    m->eval();
    const auto proj = randn64({1, 3, 6});
    return nn::grad_check([&](const torch::Tensor& x) { return (m->forward(x) * proj).sum(); }, randn64({1, 2, 16, 6}),
                          gopt);
  });
  suite("width_align", 5, [&](int) {
    nn::WidthAlign m(7, 5);
    m->to(torch::kFloat64);
    const auto proj = randn64({1, 3, 5});
    return nn::grad_check([&](const torch::Tensor& x) { return (m->forward(x) * proj).sum(); }, randn64({1, 3, 7}), gopt);
  });
  suite("sequence_smooth", 5, [&](int) {
    nn::SequenceSmoother m(4, 3, 2);
    m->to(torch::kFloat64);
    const auto proj = randn64({1, 2, 10});
    return nn::grad_check([&](const torch::Tensor& x) { return (m->forward(x) * proj).sum(); }, randn64({1, 4, 5}), gopt);
  });
  suite("affine_grid+resample (theta)", 5, [&](int) {
    const auto img = rand64({1, 2, 5, 5});
    const auto theta = torch::tensor({1.0, 0.0, 0.0, 0.0, 1.0, 0.0}, torch::kFloat64).unsqueeze(0) + 0.15 * randn64({1, 6});
    const auto proj = randn64({1, 2, 5, 5});
    return nn::grad_check(
        [&](const torch::Tensor& t) { return (nn::resample(img, nn::affine_grid(t, 5, 5)) * proj).sum(); }, theta, gopt);
  });
  suite("affine_grid+resample (input)", 5, [&](int) {
    const auto theta = torch::tensor({1.0, 0.0, 0.0, 0.0, 1.0, 0.0}, torch::kFloat64).unsqueeze(0) + 0.15 * randn64({1, 6});
    const auto proj = randn64({1, 2, 5, 5});
    return nn::grad_check(
        [&](const torch::Tensor& x) { return (nn::resample(x, nn::affine_grid(theta, 5, 5)) * proj).sum(); },
        rand64({1, 2, 5, 5}), gopt);
  });
  suite("dense_features tail", 5, [&](int) {
    nn::DenseLayer layer(4, 3, 2);
    layer->to(torch::kFloat64);
    layer->eval();
    const auto proj = randn64({1, 7});
    return nn::grad_check(
        [&](const torch::Tensor& x) { return (torch::relu(layer->forward(x)).mean({2, 3}) * proj).sum(); },
        randn64({1, 4, 4, 4}), gopt);
  });
  suite("range_aware_loss", 5, [&](int) {
    const auto target = rand64({1, 2, 8});
    const auto mask = (torch::rand({1, 2, 8}) > 0.3).to(torch::kFloat64);
    return nn::grad_check([&](const torch::Tensor& p) { return nn::range_aware_loss(p, target, mask); }, rand64({1, 2, 8}),
                          gopt);
  });
  suite("classification_loss (p)", 5, [&](int) {
    const auto labels = (torch::rand({3, 3}) > 0.5).to(torch::kFloat64);
    const auto fg = randn64({3, 6}), fd = randn64({3, 6});
    return nn::grad_check([&](const torch::Tensor& p) { return nn::classification_loss(labels, p, fg, fd); },
                          rand64({3, 3}) * 0.9 + 0.05, gopt);
  });
  suite("classification_loss (features)", 5, [&](int) {
    const auto labels = (torch::rand({3, 3}) > 0.5).to(torch::kFloat64);
    const auto p = rand64({3, 3}) * 0.9 + 0.05;
    const auto fd = randn64({3, 6});
    return nn::grad_check([&](const torch::Tensor& fg) { return nn::classification_loss(labels, p, fg, fd); },
                          randn64({3, 6}), gopt);
  });
  return o;
}

Outcome criterion4() {
  Outcome o;
  torch::manual_seed(404);
  torch::NoGradGuard guard;

  nn::SpatialTransformer stn;
  stn->eval();
  const auto x = torch::rand({2, 3, 64, 64});
  o.require(torch::equal(stn->forward(x), x), "identity STN reproduces the 64x64 patch exactly");

  nn::DenseFeatureExtractor dense;
  dense->eval();
  const bool shapes_ok = dense->expected_shapes(64) == dense->trace_shapes(torch::rand({1, 3, 64, 64}));
  o.require(shapes_ok && dense->feature_dim() == 1024, "DenseNet block shapes match, F length 1024");
  o.require(dense->forward(torch::rand({1, 3, 128, 128})).size(1) == 1024, "128x128 input also yields 1024");

  stages::DfeNet net;
  net->eval();
  const auto pred = net->forward(torch::rand({2, 3, 64, 64}));
  o.require(net->gh_input() == 1024 && net->dh_input() == 2048, "GH input 1024, DH input 2048");
  o.require(pred.f_g.size(1) == 1024 && pred.f_d.size(1) == 1024 && pred.p.size(1) == 3, "F_G, F_D 1024 and p of 3");

  nn::SectionNet section;
  section->eval();
  const auto frame = torch::rand({1, 3, 480, 640});
  const auto trace = section->trace_shapes(frame);
  const auto y = section->forward(frame);
  o.require(y.sizes() == at::IntArrayRef{1, 2, 640}, "boundary output 2x640");
  std::string fused;
  for (auto d : trace.at(trace.size() - 2)) fused += std::to_string(d) + " ";
  o.note("fused sequence " + fused);
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::mt19937_64 rng(505);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> mag(0.1, 10.0);
  int bad_pos = 0, bad_neg = 0, bad_bound = 0;
  for (int t = 0; t < 1000; ++t) {
    const int d = 1 + t % 16;
    std::vector<double> x(d), y(d), ax(d), nx(d);
    const double a = mag(rng);
    for (int i = 0; i < d; ++i) {
      x[i] = g(rng) + 0.1;
      y[i] = g(rng);
      ax[i] = a * x[i];
      nx[i] = -a * x[i];
    }
    bad_pos += std::abs(nn::cosine_similarity(x, ax) - 1.0) > 1e-12;
    bad_neg += std::abs(nn::cosine_similarity(x, nx) + 1.0) > 1e-12;
    bad_bound += std::abs(nn::cosine_similarity(x, y)) > 1.0;
  }
  o.require(bad_pos == 0, "CosSim(x, ax) = 1 for a > 0 (" + std::to_string(bad_pos) + " off)");
  o.require(bad_neg == 0, "CosSim(x, ax) = -1 for a < 0 (" + std::to_string(bad_neg) + " off)");
  o.require(bad_bound == 0, "|CosSim| <= 1 (" + std::to_string(bad_bound) + " off)");

  int bad_eps = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(3), y(3);
    for (int i = 0; i < 3; ++i) {
      x[i] = 1e-3 * g(rng);
      y[i] = 1e-3 * g(rng);
    }
    double dot = 0.0;
    for (int i = 0; i < 3; ++i) dot += x[i] * y[i];
    bad_eps += !close_rel(nn::cosine_similarity(x, y), dot / 1e-4, 1e-12);
  }
  o.require(bad_eps == 0, "eps denominator used when |x||y| < 1e-4");
  return o;
}

Outcome criterion6() {
  Outcome o;
  const std::vector<int> labels{1, 1, 1, 0, 0, 0, 0, 0, 1, 0};
  const std::vector<int> preds{1, 1, 0, 0, 1, 1, 0, 0, 1, 0};
  const auto cm = eval::confusion(labels, preds);
  o.require(cm.tp == 3 && cm.tn == 4 && cm.fp == 2 && cm.fn == 1, "fixture tallies tp=3 tn=4 fp=2 fn=1");
  const auto m = eval::metrics(cm);
  o.require(std::abs(*m.accuracy - 0.70) < 1e-12, "accuracy " + fmt(m.accuracy));
  o.require(std::abs(*m.balanced_accuracy - 0.7083) < 1e-4, "balanced accuracy " + fmt(m.balanced_accuracy));
  o.require(std::abs(*m.f1 - 0.6667) < 1e-4, "F1 " + fmt(m.f1));
  o.require(std::abs(*m.precision - 0.60) < 1e-12, "precision " + fmt(m.precision));
  o.require(std::abs(*m.recall - 0.75) < 1e-12, "recall " + fmt(m.recall));
  return o;
}

// ---------------------------------------------------------------------------
// Trained desk-scale system shared by criteria 7-10.

struct Context {
  fs::path work;
  bool reuse = false;
  eval::DeskSettings settings = eval::desk_settings();
  int eval_scenes = 200;
  int overlap_scenes = 100;
  std::string cli;

  fs::path data() const { return work / "data"; }
  fs::path models() const { return work / "models"; }
};

void log(const std::string& m) { std::cerr << "  [" << m << "]\n" << std::flush; }

struct Trained {
  std::optional<stages::ShipSegModel> ship;
  std::optional<stages::SectionModel> section;
  std::optional<stages::DefectSegModel> teacher, student;
  std::optional<stages::ClassifierModel> classifier;
  std::map<std::string, double> seconds;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename Model, typename TrainFn>
Model train_or_load(const Context& ctx, const std::string& name, Trained& t, TrainFn&& train) {
  const fs::path path = ctx.models() / (name + ".ckpt");
  const fs::path timings = ctx.models() / "timings.json";
  nlohmann::json times = fs::exists(timings) ? nlohmann::json::parse(read_text(timings)) : nlohmann::json::object();
  if (ctx.reuse && fs::exists(path) && times.contains(name)) {
    log("reusing " + path.string());
    t.seconds[name] = times[name].get<double>();
    return Model::load(path);
  }
  log("training " + name);
  const auto t0 = std::chrono::steady_clock::now();
  Model m = train();
  t.seconds[name] = seconds_since(t0);
  m.save(path);
  times[name] = t.seconds[name];
  std::ofstream(timings) << times.dump(2);
  log(name + " trained in " + fmt(t.seconds[name], 0) + " s");
  return m;
}

void ensure_data(const Context& ctx) {
  if (fs::exists(ctx.data() / "manifest.json")) return;
  log("generating " + std::to_string(ctx.settings.scenes) + " scenes");
  eval::generate_dataset(ctx.data(), ctx.settings.scenes, ctx.settings.seed, ctx.settings.corpus);
}

Trained& trained(const Context& ctx) {
  static std::optional<Trained> cache;
  if (cache) return *cache;
  ensure_data(ctx);
  fs::create_directories(ctx.models());
  Trained t;
  const auto& s = ctx.settings;
  const auto quiet = stages::ProgressFn{};
  t.ship = train_or_load<stages::ShipSegModel>(ctx, "stage1", t, [&] { return eval::train_stage1(ctx.data(), s, quiet).model; });
  t.section =
      train_or_load<stages::SectionModel>(ctx, "stage2", t, [&] { return eval::train_stage2(ctx.data(), s, quiet).model; });
  t.teacher = train_or_load<stages::DefectSegModel>(
      ctx, "teacher", t, [&] { return eval::train_teacher_stage(ctx.data(), s, quiet).model; });
  t.student = train_or_load<stages::DefectSegModel>(
      ctx, "student", t, [&] { return eval::train_student_stage(ctx.data(), *t.teacher, s, quiet).model; });
  t.classifier = train_or_load<stages::ClassifierModel>(
      ctx, "classifier", t, [&] { return eval::train_classifier_stage(ctx.data(), s.classifier, quiet).model; });
  cache = std::move(t);
  return *cache;
}

std::vector<data::ImageRecord>& test_records(const Context& ctx) {
  static std::optional<std::vector<data::ImageRecord>> cache;
  if (!cache) cache = eval::load_split(ctx.data(), data::Split::test);
  return *cache;
}

std::optional<eval::EndToEndScores> g_end_to_end;

Outcome criterion8(const Context& ctx) {
  Outcome o;
  auto& t = trained(ctx);
  const auto& test = test_records(ctx);
  for (const auto& [name, sec] : t.seconds)
    o.require(sec <= 1800.0, name + " training " + fmt(sec, 0) + " s (<= 1800)");

  const double ship = eval::evaluate_ship(*t.ship, test);
  o.require(ship >= 0.90, "stage1 ship IoU " + fmt(ship) + " >= 0.90");

  const auto sec = eval::evaluate_sections(*t.section, test);
  const char* names[] = {"TS", "BT", "VS"};
  for (int k = 0; k < 3; ++k)
    o.require(sec.iou[k] && *sec.iou[k] >= 0.80, std::string("stage2 ") + names[k] + " IoU " + fmt(sec.iou[k]) + " >= 0.80");

  const auto def = eval::evaluate_defects(*t.student, test);
  const char* dnames[] = {"corrosion", "delamination", "fouling"};
  for (int k = 0; k < 3; ++k)
    o.require(def.iou[k] && *def.iou[k] >= 0.50, std::string("stage3 ") + dnames[k] + " IoU " + fmt(def.iou[k]) + " >= 0.50");

  eval::PipelineConfig cfg;
  cfg.output_dir = ctx.work / "reports";
  eval::PipelineModels models{*t.ship, *t.section, *t.student, *t.classifier};
  g_end_to_end = eval::evaluate_pipeline(models, ctx.data(), test, cfg, 2.0);
  o.require(g_end_to_end->pass_fraction >= 0.80,
            "coverage within 2 pp on " + fmt(100.0 * g_end_to_end->pass_fraction, 1) + "% of test scenes (>= 80%)");
  return o;
}

Outcome criterion9(const Context& ctx) {
  Outcome o;
  auto& t = trained(ctx);
  const auto& test = test_records(ctx);

  const auto teacher = eval::evaluate_defects(*t.teacher, test);
  const auto student = eval::evaluate_defects(*t.student, test);
  o.require(student.overall_recall.value_or(0) >= teacher.overall_recall.value_or(0),
            "(a) student recall " + fmt(student.overall_recall) + " >= teacher " + fmt(teacher.overall_recall));

  const auto& base = ctx.settings.classifier;
  const auto train_frames = eval::ship_frames(eval::load_split(ctx.data(), data::Split::train));
  const auto train = eval::label_roi_patches(train_frames, base.net.patch, base.roi_thresh);
  log("classifier ablation: " + std::to_string(train.size()) + " training patches");

  data::CorpusOptions held_out;
  std::vector<data::ImageRecord> eval_frames;
  for (const auto& g : data::generate_corpus(ctx.eval_scenes, ctx.settings.seed + 500, held_out))
    eval_frames.push_back(stages::to_ship_frame(g.record));
  const auto eval_patches = eval::label_roi_patches(eval_frames, base.net.patch, base.roi_thresh);
  const auto overlap = eval::overlap_test_patches(ctx.overlap_scenes, ctx.settings.seed + 1000, 0.8, base.net.patch,
                                                  base.roi_thresh);

  using V = stages::ClassifierVariant;
  const std::vector<std::uint64_t> seeds{ctx.settings.seed, ctx.settings.seed + 1, ctx.settings.seed + 2};
  std::map<V, double> delam;
  std::vector<double> cos_first, cos_last;
  double multilabel_overlap = 0.0;
  for (const V v : {V::with_regularizer, V::without_regularizer, V::no_dfe}) {
    double sum = 0.0;
    for (const auto seed : seeds) {
      auto cfg = stages::variant_config(base, v);
      cfg.train.seed = seed;
      const auto t0 = std::chrono::steady_clock::now();
      auto res = stages::train_classifier(train, cfg);
      const auto scores = eval::evaluate_classifier(res.model, eval_patches);
      sum += scores.balanced_accuracy[2].value_or(0.0);
      log(std::string(stages::variant_name(v)) + " seed " + std::to_string(seed) + " delamination BA " +
          fmt(scores.balanced_accuracy[2]) + " (" + fmt(seconds_since(t0), 0) + " s)");
      if (v == V::with_regularizer) {
        cos_first.push_back(res.epoch_mean_abs_cos.front());
        cos_last.push_back(res.epoch_mean_abs_cos.back());
        if (seed == seeds.front()) multilabel_overlap = eval::evaluate_classifier(res.model, overlap).mean_balanced_accuracy;
      }
    }
    delam[v] = sum / static_cast<double>(seeds.size());
  }
  o.require(delam[V::with_regularizer] >= delam[V::without_regularizer] &&
                delam[V::without_regularizer] >= delam[V::no_dfe],
            "(b) delamination balanced accuracy with reg " + fmt(delam[V::with_regularizer]) + " >= without " +
                fmt(delam[V::without_regularizer]) + " >= no DFE " + fmt(delam[V::no_dfe]));

  auto mc_cfg = stages::variant_config(base, V::multiclass);
  mc_cfg.train.seed = seeds.front();
  auto mc = stages::train_classifier(train, mc_cfg);
  const double multiclass_overlap = eval::evaluate_classifier(mc.model, overlap).mean_balanced_accuracy;
  o.require(multilabel_overlap >= multiclass_overlap, "(c) overlapping set: multi-label " + fmt(multilabel_overlap) +
                                                          " >= multi-class " + fmt(multiclass_overlap) + " (" +
                                                          std::to_string(overlap.size()) + " patches)");

  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < cos_first.size(); ++i) first += cos_first[i], last += cos_last[i];
  first /= static_cast<double>(cos_first.size());
  last /= static_cast<double>(cos_last.size());
  o.require(last < first, "(d) mean |CosSim(F_G, F_D)| final epoch " + fmt(last) + " < epoch 1 " + fmt(first));
  return o;
}

Outcome criterion7(const Context& ctx) {
  Outcome o;
  ensure_data(ctx);
  const auto frames = eval::ship_frames(eval::load_split(ctx.data(), data::Split::train));
  std::optional<stages::DefectSegModel> teacher;
  if (fs::exists(ctx.models() / "teacher.ckpt")) {
    teacher = stages::DefectSegModel::load(ctx.models() / "teacher.ckpt");
  } else {
    auto cfg = ctx.settings.teacher;
    cfg.threshold = 0.45;  // an untrained net still marks some pixels
    torch::manual_seed(707);
    teacher.emplace(cfg);
  }
  int violations = 0;
  std::size_t pseudo_px = 0;
  const auto fused = stages::fuse_dataset(*teacher, frames, stages::FusionMode::union_);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& human = *frames[i].defect_masks;
    const auto pseudo = stages::pseudo_label(*teacher, frames[i].pixels);
    const auto all = stages::fuse_labels(human, pseudo);
    const auto on_ship = maskset_restrict(pseudo, *frames[i].ship_mask);
    for (int k = 0; k < 3; ++k) {
      pseudo_px += pseudo.masks[k].count();
      violations += mask_intersection(human.masks[k], all.masks[k]) != human.masks[k];
      violations += mask_intersection(pseudo.masks[k], all.masks[k]) != pseudo.masks[k];
      violations += mask_intersection(human.masks[k], fused[i].defect_masks->masks[k]) != human.masks[k];
      violations += mask_intersection(on_ship.masks[k], fused[i].defect_masks->masks[k]) != on_ship.masks[k];
    }
  }
  o.require(violations == 0, "human and pseudo labels inside the fused labels on " + std::to_string(frames.size()) +
                                 " records (" + std::to_string(pseudo_px) + " pseudo pixels)");

  // Suppression on every generated scene with fouling painted over the whole hull.
  int ts_left = 0, scenes = 0;
  for (const auto& g : data::generate_corpus(40, ctx.settings.seed + 7, {})) {
    MaskSet d = *g.record.defect_masks;
    d[Defect::fouling] = *g.record.ship_mask;
    const auto rep = coverage(g.placement.sections, suppress_ts_fouling(g.placement.sections, d));
    ts_left += rep[Section::ts].present && rep.percent(Section::ts, Defect::fouling) != 0.0;
    ++scenes;
  }
  std::size_t reports = 0;
  if (g_end_to_end) {
    for (const auto& r : g_end_to_end->reports) {
      ts_left += r[Section::ts].present && r.percent(Section::ts, Defect::fouling) != 0.0;
      ++reports;
    }
  }
  o.require(ts_left == 0, "fouling_TS = 0 after suppression on " + std::to_string(scenes) + " stress scenes and " +
                              std::to_string(reports) + " pipeline reports");
  return o;
}

int run(const std::string& cmd) {
  const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  return rc;
}

// Compares every regular file under a and b by relative path.
std::pair<std::size_t, std::vector<std::string>> compare_trees(const fs::path& a, const fs::path& b) {
  std::size_t n = 0;
  std::vector<std::string> diffs;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    ++n;
    if (!fs::exists(b / rel) || read_text(e.path()) != read_text(b / rel)) diffs.push_back(rel.string());
  }
  return {n, diffs};
}

Outcome criterion10(const Context& ctx) {
  Outcome o;
  const fs::path root = ctx.work / "determinism";
  fs::remove_all(root);
  const std::string cli = ctx.cli;
  std::array<fs::path, 2> runs{root / "a", root / "b"};
  for (const auto& r : runs) {
    const std::string base = cli + " -q --seed 11 --data " + (r / "data").string();
    bool ok = run(cli + " generate-data -q --seed 11 --scenes 12 --out " + (r / "data").string()) == 0;
    for (const char* stage : {"stage1", "stage2", "teacher", "student", "classifier"})
      ok = ok && run(base + " --max-steps 3 --out " + (r / "models").string() + " train " + stage) == 0;
    ok = ok && run(base + " --models " + (r / "models").string() + " --out " + (r / "infer").string() + " infer " +
                   (r / "data" / "test").string()) == 0;
    if (fs::exists(ctx.models() / "classifier.ckpt")) {
      ok = ok && run(cli + " -q --models " + ctx.models().string() + " --out " + (r / "infer_trained").string() +
                     " infer " + (ctx.data() / "test").string()) == 0;
    }
    o.require(ok, "CLI commands succeed in run " + r.filename().string());
  }
  for (const char* sub : {"data", "models", "infer", "infer_trained"}) {
    if (!fs::exists(runs[0] / sub)) continue;
    const auto [n, diffs] = compare_trees(runs[0] / sub, runs[1] / sub);
    o.require(n > 0 && diffs.empty(), std::string(sub) + ": " + std::to_string(n) + " files, " +
                                          std::to_string(diffs.size()) + " differ" +
                                          (diffs.empty() ? "" : " (first " + diffs.front() + ")"));
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  Context ctx;
  std::vector<int> only;
  ctx.work = "acceptance_work";
  ctx.cli = HULLSCAN_CLI_PATH;
  app.add_option("--work", ctx.work, "scratch directory");
  app.add_option("--only", only, "criteria to run (default all)")->delimiter(',');
  app.add_flag("--reuse", ctx.reuse, "keep data and checkpoints from an earlier run");
  app.add_option("--cli", ctx.cli, "hullscan executable");
  CLI11_PARSE(app, argc, argv);

  if (!ctx.reuse) fs::remove_all(ctx.work);
  fs::create_directories(ctx.work);
  nn::make_deterministic(1);

  // 8 runs before 7 so the pipeline reports feed the suppression check.
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, criterion4},
      {5, criterion5},
      {6, criterion6},
      {8, [&] { return criterion8(ctx); }},
      {7, [&] { return criterion7(ctx); }},
      {9, [&] { return criterion9(ctx); }},
      {10, [&] { return criterion10(ctx); }},
  };
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    failed += !out.pass;
    std::string detail;
    for (const auto& n : out.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::cout << "criterion " << id << ": " << (out.pass ? "PASS" : "FAIL") << " (" << fmt(seconds_since(t0), 1)
              << " s) " << detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
