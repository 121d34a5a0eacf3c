#pragma once

#include <torch/torch.h>

#include <array>

namespace hullscan::nn {

/// Affine warp in normalized [-1, 1] coordinates: source = R * target + tau.
struct AffineParams {
  std::array<double, 4> R = {1.0, 0.0, 0.0, 1.0};  ///< r_xx, r_xy, r_yx, r_yy
  std::array<double, 2> tau = {0.0, 0.0};           ///< t_x, t_y

  static AffineParams identity() { return {}; }
  bool is_finite() const;
  /// [6] laid out as (r_xx, r_xy, t_x, r_yx, r_yy, t_y).
  torch::Tensor to_tensor(torch::Dtype dtype = torch::kFloat32) const;
  static AffineParams from_tensor(const torch::Tensor& theta);
  bool operator==(const AffineParams&) const = default;
};

/// Sampling grid [N, H, W, 2] holding source (x, y) for every target pixel.
/// `theta` is [N, 6] in AffineParams::to_tensor layout. The target lattice
/// spans [-1, 1] inclusive of the border pixel centres.
torch::Tensor affine_grid(const torch::Tensor& theta, int height, int width);

/// Bilinear sampling of `input` [N, C, H, W] at `grid` [N, Ho, Wo, 2];
/// samples outside the image read zero. Differentiable in both arguments.
torch::Tensor resample(const torch::Tensor& input, const torch::Tensor& grid);

struct StnOptions {
  std::array<int, 3> channels = {100, 100, 50};
  int patch = 64;
};

/// Localization net: 7x7, 5x5, 3x3 convolutions, then a 1x1 convolution to six
/// values and a global average. Starts out emitting the identity transform.
class StnLocalizerImpl : public torch::nn::Module {
 public:
  explicit StnLocalizerImpl(const StnOptions& options = {});
  /// [N, 3, patch, patch] -> [N, 6].
  torch::Tensor forward(const torch::Tensor& x);
  const StnOptions& options() const { return options_; }

 private:
  StnOptions options_;
  torch::nn::Sequential body_{nullptr};
  torch::nn::Conv2d out_{nullptr};
};
TORCH_MODULE(StnLocalizer);

/// Localizer, grid generator and resampler.
class SpatialTransformerImpl : public torch::nn::Module {
 public:
  explicit SpatialTransformerImpl(const StnOptions& options = {});
  torch::Tensor forward(const torch::Tensor& x);
  /// The parameters used by the last forward call, [N, 6].
  const torch::Tensor& last_theta() const { return theta_; }

 private:
  StnLocalizer localizer_{nullptr};
  torch::Tensor theta_;
};
TORCH_MODULE(SpatialTransformer);

}  // namespace hullscan::nn
