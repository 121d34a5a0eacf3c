#pragma once

#include <torch/torch.h>

#include <array>
#include <span>

#include "hullscan/raster/sections.hpp"

namespace hullscan::nn {

/// Sum of |target - pred| over positions where `mask` is set. Masked-out
/// positions contribute exactly zero to the value and the gradient.
torch::Tensor range_aware_loss(const torch::Tensor& pred, const torch::Tensor& target, const torch::Tensor& mask);
/// Same, with the target's validity flags as the mask.
double range_aware_loss(const BoundaryPair& pred, const BoundaryPair& target);

/// Elementwise -(l log p + (1 - l) log(1 - p)) with p clamped to [clamp, 1 - clamp].
torch::Tensor bce(const torch::Tensor& labels, const torch::Tensor& p, double clamp = 1e-7);
double bce(double label, double p, double clamp = 1e-7);

/// x.y / max(|x| |y|, eps) along the last dimension.
torch::Tensor cosine_similarity(const torch::Tensor& x, const torch::Tensor& y, double eps = 1e-4);
double cosine_similarity(std::span<const double> x, std::span<const double> y, double eps = 1e-4);

struct ClsLossConfig {
  /// corrosion, fouling, delamination
  std::array<double, 3> w = {1.0, 2.0, 4.0};
  double lambda = 1.0;
  double eps = 1e-4;
  double prob_clamp = 1e-7;
};

void validate(const ClsLossConfig& cfg);

/// Per-sample sum_i w_i bce(l_i, p_i) + lambda |cos(F_G, F_D)|, averaged over
/// the batch. `labels` and `p` are [N, 3]; the features [N, F]. An undefined
/// `f_d` drops the regularizer.
torch::Tensor classification_loss(const torch::Tensor& labels, const torch::Tensor& p, const torch::Tensor& f_g,
                                  const torch::Tensor& f_d, const ClsLossConfig& cfg = {});

}  // namespace hullscan::nn
