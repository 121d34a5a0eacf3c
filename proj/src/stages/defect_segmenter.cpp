#include "hullscan/stages/defect_segmenter.hpp"

#include <stdexcept>
#include <string>

#include "hullscan/nn/checkpoint.hpp"
#include "hullscan/nn/tensor_util.hpp"

namespace hullscan::stages {

std::string_view role_name(ModelRole r) { return r == ModelRole::teacher ? "teacher" : "student"; }

ModelRole parse_role(std::string_view s) {
  if (s == "teacher") return ModelRole::teacher;
  if (s == "student") return ModelRole::student;
  throw std::invalid_argument("unknown model role '" + std::string(s) + "'");
}

DefectSegModel::DefectSegModel(const DefectSegConfig& cfg, ModelRole r) : role(r), config(cfg) {
  config.net.classes = 3;
  if (config.patch % 32 != 0) throw std::invalid_argument("DefectSegConfig: patch must be divisible by 32");
  net = nn::UNet(config.net);
}

void DefectSegModel::save(const std::filesystem::path& path) {
  nn::save_checkpoint(path, *net, kDefectArchitecture,
                      {{"net", to_json(config.net)},
                       {"train", to_json(config.train)},
                       {"patch", config.patch},
                       {"min_defect_frac", config.min_defect_frac},
                       {"threshold", config.threshold},
                       {"dice_weight", config.dice_weight},
                       {"role", role_name(role)}});
}

DefectSegModel DefectSegModel::load(const std::filesystem::path& path) {
  const auto header = nn::read_checkpoint_header(path);
  DefectSegConfig cfg;
  ModelRole role;
  try {
    const auto& j = header.config;
    cfg.net = unet_from_json(j.at("net"));
    cfg.train = train_config_from_json(j.at("train"));
    cfg.patch = j.at("patch");
    cfg.min_defect_frac = j.at("min_defect_frac");
    cfg.threshold = j.at("threshold");
    cfg.dice_weight = j.value("dice_weight", 0.0);
    role = parse_role(j.at("role").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw nn::CheckpointError("defect checkpoint config: " + std::string(e.what()));
  }
  DefectSegModel model(cfg, role);
  nn::load_checkpoint(path, *model.net, kDefectArchitecture);
  model.net->eval();
  return model;
}

torch::Tensor soft_dice_loss(const torch::Tensor& logits, const torch::Tensor& target, double smooth) {
  nn::require_shape(target, {logits.sizes().vec(), nn::TensorRole::logits}, "soft_dice_loss target");
  const auto p = torch::sigmoid(logits);
  const std::vector<std::int64_t> dims{0, 2, 3};
  const auto inter = (p * target).sum(dims);
  const auto total = p.sum(dims) + target.sum(dims);
  return (1.0 - (2.0 * inter + smooth) / (total + smooth)).mean();
}

DefectTrainResult train_defect_segmenter(std::span<const data::Patch> patches, const DefectSegConfig& cfg,
                                         ModelRole role, const ProgressFn& progress) {
  if (patches.empty()) throw std::invalid_argument("train_defect_segmenter: empty patch set");
  for (const auto& p : patches) {
    if (!p.masks) throw std::invalid_argument("train_defect_segmenter: patch without masks");
    if (p.pixels.rows() != cfg.patch || p.pixels.cols() != cfg.patch) {
      throw std::invalid_argument("train_defect_segmenter: patch size differs from config");
    }
  }
  nn::make_deterministic(cfg.train.seed);
  DefectSegModel model(cfg, role);
  auto step = [&](std::span<const std::size_t> idx) {
    std::vector<const RgbImage*> imgs;
    std::vector<torch::Tensor> masks;
    for (auto i : idx) {
      imgs.push_back(&patches[i].pixels);
      masks.push_back(nn::maskset_to_tensor(*patches[i].masks));
    }
    auto logits = model.net->forward(nn::images_to_batch(imgs));
    const auto target = torch::stack(masks);
    auto loss = torch::binary_cross_entropy_with_logits(logits, target);
    if (cfg.dice_weight > 0.0) loss = loss + cfg.dice_weight * soft_dice_loss(logits, target);
    return loss;
  };
  auto history = run_training(*model.net, patches.size(), cfg.train, step, progress);
  return {std::move(model), std::move(history)};
}

DefectTrainResult train_teacher(std::span<const data::Patch> patches, const DefectSegConfig& cfg,
                                const ProgressFn& progress) {
  return train_defect_segmenter(patches, cfg, ModelRole::teacher, progress);
}

DefectTrainResult train_student(std::span<const data::Patch> patches, const DefectSegConfig& cfg,
                                const ProgressFn& progress) {
  return train_defect_segmenter(patches, cfg, ModelRole::student, progress);
}

std::vector<data::Patch> seg_patches(std::span<const data::ImageRecord> records, const DefectSegConfig& cfg) {
  std::vector<data::Patch> out;
  for (const auto& r : records) {
    if (!r.defect_masks) continue;
    auto ps = data::slice_seg_patches(r, cfg.patch, cfg.min_defect_frac);
    for (auto& p : ps) out.push_back(std::move(p));
  }
  return out;
}

torch::Tensor defect_probabilities(DefectSegModel& model, const RgbImage& image) {
  torch::NoGradGuard guard;
  model.net->eval();
  const int size = model.config.patch;
  const auto origins = data::tile_origins(image.rows(), image.cols(), size);
  auto out = torch::zeros({3, image.rows(), image.cols()}, torch::kFloat32);
  for (const auto& [r0, c0] : origins) {
    const RgbImage tile = image.crop_reflect(r0, c0, size, size);
    auto prob = torch::sigmoid(model.net->forward(nn::image_to_tensor(tile).unsqueeze(0)))[0];
    const int h = std::min(size, image.rows() - r0);
    const int w = std::min(size, image.cols() - c0);
    out.narrow(1, r0, h).narrow(2, c0, w).copy_(prob.narrow(1, 0, h).narrow(2, 0, w));
  }
  return out;
}

DefectSegmentation segment_defects(DefectSegModel& model, const RgbImage& image) {
  const auto prob = defect_probabilities(model, image);
  DefectSegmentation seg;
  for (int k = 0; k < 3; ++k) seg.masks.masks[k] = nn::tensor_to_mask(prob[k], model.config.threshold);
  seg.roi = seg.masks.any();
  return seg;
}

MaskSet pseudo_label(DefectSegModel& teacher, const RgbImage& image) { return segment_defects(teacher, image).masks; }

MaskSet fuse_labels(const MaskSet& human, const MaskSet& pseudo) { return maskset_union(human, pseudo); }

MaskSet fuse_labels_intersection(const MaskSet& human, const MaskSet& pseudo, int tile) {
  const MaskSet both = maskset_intersection(human, pseudo);
  MaskSet out = human;
  const int rows = human.masks[0].rows();
  const int cols = human.masks[0].cols();
  for (const auto& [r0, c0] : data::tile_origins(rows, cols, tile)) {
    const int r1 = std::min(rows, r0 + tile);
    const int c1 = std::min(cols, c0 + tile);
    std::size_t fouling = 0, any = 0;
    for (int r = r0; r < r1; ++r) {
      for (int c = c0; c < c1; ++c) {
        const bool f = human[Defect::fouling].test(r, c);
        fouling += f;
        any += f || human[Defect::corrosion].test(r, c) || human[Defect::delamination].test(r, c);
      }
    }
    if (any == 0 || 2 * fouling <= any) continue;
    for (int k = 0; k < 3; ++k)
      for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) out.masks[k].set(r, c, both.masks[k].test(r, c));
  }
  return out;
}

std::vector<data::ImageRecord> fuse_dataset(DefectSegModel& teacher, std::span<const data::ImageRecord> records,
                                            FusionMode mode) {
  std::vector<data::ImageRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    data::ImageRecord f = r;
    if (r.defect_masks && mode != FusionMode::none) {
      const MaskSet pseudo = pseudo_label(teacher, r.pixels);
      MaskSet fused = mode == FusionMode::union_ ? fuse_labels(*r.defect_masks, pseudo)
                                                 : fuse_labels_intersection(*r.defect_masks, pseudo, teacher.config.patch);
      if (r.ship_mask) fused = maskset_restrict(fused, *r.ship_mask);
      f.defect_masks = fused;
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace hullscan::stages
