#include "hullscan/stages/classifier_training.hpp"

#include <stdexcept>

#include "hullscan/nn/checkpoint.hpp"
#include "hullscan/nn/tensor_util.hpp"

namespace hullscan::stages {

namespace {

nlohmann::json net_json(const DfeNetOptions& o) {
  return {{"stn", to_json(o.stn)},   {"extractor", to_json(o.extractor)}, {"use_stn", o.use_stn},
          {"use_dfe", o.use_dfe},    {"multiclass", o.multiclass},        {"dropout", o.dropout},
          {"head", o.head},          {"patch", o.patch}};
}

DfeNetOptions net_from_json(const nlohmann::json& j) {
  DfeNetOptions o;
  o.stn = stn_from_json(j.at("stn"));
  o.extractor = densenet_from_json(j.at("extractor"));
  o.use_stn = j.at("use_stn");
  o.use_dfe = j.at("use_dfe");
  o.multiclass = j.at("multiclass");
  o.dropout = j.at("dropout");
  o.head = j.at("head");
  o.patch = j.at("patch");
  return o;
}

torch::Tensor batch_of(std::span<const data::Patch> patches, std::span<const std::size_t> idx) {
  std::vector<const RgbImage*> imgs;
  for (auto i : idx) imgs.push_back(&patches[i].pixels);
  return nn::images_to_batch(imgs);
}

}  // namespace

ClassifierModel::ClassifierModel(const ClassifierConfig& cfg) : net(DfeNet(cfg.net)), config(cfg) {}

void ClassifierModel::save(const std::filesystem::path& path) {
  const auto& l = config.loss;
  nn::save_checkpoint(path, *net, kClassifierArchitecture,
                      {{"net", net_json(config.net)},
                       {"loss", {{"w", l.w}, {"lambda", l.lambda}, {"eps", l.eps}, {"prob_clamp", l.prob_clamp}}},
                       {"train", to_json(config.train)},
                       {"threshold", config.threshold},
                       {"roi_thresh", config.roi_thresh}});
}

ClassifierModel ClassifierModel::load(const std::filesystem::path& path) {
  const auto header = nn::read_checkpoint_header(path);
  ClassifierConfig cfg;
  try {
    const auto& j = header.config;
    cfg.net = net_from_json(j.at("net"));
    cfg.loss.w = j.at("loss").at("w");
    cfg.loss.lambda = j.at("loss").at("lambda");
    cfg.loss.eps = j.at("loss").at("eps");
    cfg.loss.prob_clamp = j.at("loss").at("prob_clamp");
    cfg.train = train_config_from_json(j.at("train"));
    cfg.threshold = j.at("threshold");
    cfg.roi_thresh = j.at("roi_thresh");
  } catch (const nlohmann::json::exception& e) {
    throw nn::CheckpointError("classifier checkpoint config: " + std::string(e.what()));
  }
  ClassifierModel model(cfg);
  nn::load_checkpoint(path, *model.net, kClassifierArchitecture);
  model.net->eval();
  return model;
}

int dominant_class(const data::Patch& patch) {
  int best = -1;
  std::size_t most = 0;
  for (int k = 0; k < 3; ++k) {
    const std::size_t n = patch.overlap[k] > 0 ? patch.overlap[k] : static_cast<std::size_t>(patch.labels[k]);
    if (n > most) {
      most = n;
      best = k;
    }
  }
  return best;
}

ClassifierTrainResult train_classifier(std::span<const data::Patch> patches, const ClassifierConfig& cfg,
                                       const ProgressFn& progress) {
  nn::validate(cfg.loss);
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    if (patches[i].pixels.rows() != cfg.net.patch || patches[i].pixels.cols() != cfg.net.patch) {
      throw std::invalid_argument("train_classifier: patch size differs from config");
    }
    if (!cfg.net.multiclass || dominant_class(patches[i]) >= 0) usable.push_back(i);
  }
  if (usable.empty()) throw std::invalid_argument("train_classifier: empty patch set");
  nn::make_deterministic(cfg.train.seed);
  ClassifierModel model(cfg);
  ClassifierTrainResult result{model, {}, {}};
  double cos_sum = 0.0;
  std::size_t cos_count = 0;
  auto step = [&](std::span<const std::size_t> idx) {
    std::vector<std::size_t> ids;
    for (auto i : idx) ids.push_back(usable[i]);
    auto pred = model.net->forward(batch_of(patches, ids));
    if (cfg.net.multiclass) {
      std::vector<std::int64_t> target;
      for (auto i : ids) target.push_back(dominant_class(patches[i]));
      return torch::nn::functional::cross_entropy(pred.logits, torch::tensor(target, torch::kInt64));
    }
    auto labels = torch::empty({static_cast<std::int64_t>(ids.size()), 3}, torch::kFloat32);
    for (std::size_t b = 0; b < ids.size(); ++b)
      for (int k = 0; k < 3; ++k) labels[b][k] = static_cast<float>(patches[ids[b]].labels[k]);
    if (pred.f_d.defined()) {
      auto c = nn::cosine_similarity(pred.f_g.detach(), pred.f_d.detach(), cfg.loss.eps).abs();
      cos_sum += c.sum().item<double>();
      cos_count += ids.size();
    }
    return nn::classification_loss(labels, pred.p, pred.f_g, pred.f_d, cfg.loss);
  };
  auto on_epoch = [&](int) {
    if (cos_count > 0) result.epoch_mean_abs_cos.push_back(cos_sum / cos_count);
    cos_sum = 0.0;
    cos_count = 0;
  };
  result.history = run_training(*model.net, usable.size(), cfg.train, step, progress, on_epoch);
  return result;
}

std::vector<std::array<double, 3>> predict_patches(ClassifierModel& model, std::span<const data::Patch> patches) {
  torch::NoGradGuard guard;
  model.net->eval();
  std::vector<std::array<double, 3>> out;
  out.reserve(patches.size());
  constexpr std::size_t kBatch = 32;
  for (std::size_t lo = 0; lo < patches.size(); lo += kBatch) {
    std::vector<std::size_t> ids;
    for (std::size_t i = lo; i < std::min(patches.size(), lo + kBatch); ++i) ids.push_back(i);
    auto p = model.net->forward(batch_of(patches, ids)).p.to(torch::kFloat64).contiguous();
    auto a = p.accessor<double, 2>();
    for (std::int64_t b = 0; b < p.size(0); ++b) out.push_back({a[b][0], a[b][1], a[b][2]});
  }
  return out;
}

std::vector<std::array<int, 3>> decide(const ClassifierModel& model, std::span<const std::array<double, 3>> p) {
  std::vector<std::array<int, 3>> out;
  for (const auto& q : p) {
    std::array<int, 3> d{};
    if (model.config.net.multiclass) {
      int best = 0;
      for (int k = 1; k < 3; ++k)
        if (q[k] > q[best]) best = k;
      d[best] = 1;
    } else {
      for (int k = 0; k < 3; ++k) d[k] = q[k] > model.config.threshold ? 1 : 0;
    }
    out.push_back(d);
  }
  return out;
}

int multiclass_baseline_forward(ClassifierModel& model, const RgbImage& patch) {
  if (!model.config.net.multiclass) throw std::invalid_argument("multiclass_baseline_forward: not a multi-class model");
  torch::NoGradGuard guard;
  model.net->eval();
  auto p = model.net->forward(nn::image_to_tensor(patch).unsqueeze(0)).p[0];
  int best = 0;
  for (int k = 1; k < 3; ++k)
    if (p[k].item<double>() > p[best].item<double>()) best = k;
  return best;
}

std::array<eval::ConfusionMatrix, 3> patch_confusions(std::span<const data::Patch> patches,
                                                      std::span<const std::array<int, 3>> decisions) {
  if (patches.size() != decisions.size()) throw std::invalid_argument("patch_confusions: length mismatch");
  std::array<eval::ConfusionMatrix, 3> cms{};
  for (int k = 0; k < 3; ++k) {
    std::vector<int> labels, preds;
    for (std::size_t i = 0; i < patches.size(); ++i) {
      labels.push_back(patches[i].labels[k]);
      preds.push_back(decisions[i][k]);
    }
    if (!labels.empty()) cms[k] = eval::confusion(labels, preds);
  }
  return cms;
}

double mean_balanced_accuracy(const std::array<eval::ConfusionMatrix, 3>& cms) {
  std::vector<std::optional<double>> v;
  for (const auto& cm : cms) v.push_back(eval::metrics(cm).balanced_accuracy);
  return eval::mean_defined(v).value_or(0.0);
}

MaskSet assemble_defect_map(const MaskSet& stage3, std::span<const data::Patch> patches,
                            std::span<const std::array<double, 3>> p, int size, double threshold) {
  if (patches.size() != p.size()) throw std::invalid_argument("assemble_defect_map: length mismatch");
  MaskSet out = stage3;
  const BinaryMask roi = stage3.any();
  const int rows = roi.rows(), cols = roi.cols();
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const int r0 = patches[i].row, c0 = patches[i].col;
    for (int k = 0; k < 3; ++k) {
      const bool on = p[i][k] > threshold;
      BinaryMask& m = out[kClassifierOrder[k]];
      for (int r = r0; r < std::min(rows, r0 + size); ++r)
        for (int c = c0; c < std::min(cols, c0 + size); ++c)
          if (roi.test(r, c)) m.set(r, c, on);
    }
  }
  return out;
}

std::string_view variant_name(ClassifierVariant v) {
  switch (v) {
    case ClassifierVariant::with_regularizer: return "with_regularizer";
    case ClassifierVariant::without_regularizer: return "no_regularizer";
    case ClassifierVariant::no_dfe: return "without_dfe";
    case ClassifierVariant::no_stn: return "no_stn";
    case ClassifierVariant::multiclass: return "multiclass";
  }
  return "?";
}

ClassifierConfig variant_config(const ClassifierConfig& base, ClassifierVariant v) {
  ClassifierConfig c = base;
  switch (v) {
    case ClassifierVariant::with_regularizer:
      c.net.use_dfe = true;
      c.net.multiclass = false;
      break;
    case ClassifierVariant::without_regularizer:
      c.net.use_dfe = true;
      c.net.multiclass = false;
      c.loss.lambda = 0.0;
      break;
    case ClassifierVariant::no_dfe:
      c.net.use_dfe = false;
      c.net.multiclass = false;
      break;
    case ClassifierVariant::no_stn:
      c.net.use_stn = false;
      break;
    case ClassifierVariant::multiclass:
      c.net.use_dfe = false;
      c.net.multiclass = true;
      break;
  }
  return c;
}

}  // namespace hullscan::stages
