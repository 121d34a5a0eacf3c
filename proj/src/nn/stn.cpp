#include "hullscan/nn/stn.hpp"

#include <cmath>
#include <stdexcept>

#include "hullscan/nn/resnet.hpp"
#include "hullscan/nn/tensor_util.hpp"

namespace hullscan::nn {

namespace {

constexpr double kSnap = 1e-5;

torch::Tensor lattice(int n, const torch::TensorOptions& opts) {
  if (n == 1) return torch::zeros({1}, opts);
  return torch::arange(n, opts).mul(2.0 / (n - 1)).sub(1.0);
}

// Pixel coordinate for a normalized one; values within kSnap of an integer
// land on it exactly while keeping the gradient of the unsnapped value.
torch::Tensor to_pixels(const torch::Tensor& v, int n) {
  auto p = (v + 1.0) * (0.5 * (n - 1));
  auto r = torch::round(p);
  auto near = (r - p).abs().lt(kSnap);
  return p + torch::where(near, r - p, torch::zeros_like(p)).detach();
}

}  // namespace

bool AffineParams::is_finite() const {
  for (double v : R)
    if (!std::isfinite(v)) return false;
  return std::isfinite(tau[0]) && std::isfinite(tau[1]);
}

torch::Tensor AffineParams::to_tensor(torch::Dtype dtype) const {
  return torch::tensor({R[0], R[1], tau[0], R[2], R[3], tau[1]}, torch::kFloat64).to(dtype);
}

AffineParams AffineParams::from_tensor(const torch::Tensor& theta) {
  if (theta.numel() != 6) throw std::invalid_argument("AffineParams: expected 6 values");
  auto t = theta.detach().to(torch::kFloat64).contiguous().view({6});
  auto a = t.accessor<double, 1>();
  return AffineParams{{a[0], a[1], a[3], a[4]}, {a[2], a[5]}};
}

torch::Tensor affine_grid(const torch::Tensor& theta, int height, int width) {
  require_shape(theta, {{-1, 6}, TensorRole::feature}, "affine_grid theta");
  const auto opts = theta.options().requires_grad(false);
  auto ys = lattice(height, opts);
  auto xs = lattice(width, opts);
  auto mesh = torch::meshgrid({ys, xs}, "ij");
  // Homogeneous target coordinates [H*W, 3].
  auto base = torch::stack({mesh[1].reshape(-1), mesh[0].reshape(-1), torch::ones({height * width}, opts)}, 1);
  auto m = theta.view({-1, 2, 3});
  auto grid = torch::matmul(base.unsqueeze(0), m.transpose(1, 2));  // [N, H*W, 2]
  return grid.view({theta.size(0), height, width, 2});
}

torch::Tensor resample(const torch::Tensor& input, const torch::Tensor& grid) {
  require_shape(input, {{-1, -1, -1, -1}, TensorRole::image}, "resample input");
  require_shape(grid, {{input.size(0), -1, -1, 2}, TensorRole::grid}, "resample grid");
  const auto n = input.size(0), c = input.size(1), h = input.size(2), w = input.size(3);
  const auto ho = grid.size(1), wo = grid.size(2);
  auto ix = to_pixels(grid.select(3, 0), static_cast<int>(w));
  auto iy = to_pixels(grid.select(3, 1), static_cast<int>(h));
  auto x0 = torch::floor(ix).detach();
  auto y0 = torch::floor(iy).detach();
  auto fx = ix - x0;
  auto fy = iy - y0;
  auto flat = input.reshape({n, c, h * w});
  torch::Tensor out = torch::zeros({n, c, ho, wo}, input.options());
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      auto xs = x0 + dx;
      auto ys = y0 + dy;
      auto valid = xs.ge(0).logical_and(xs.le(w - 1)).logical_and(ys.ge(0)).logical_and(ys.le(h - 1));
      auto idx = (ys.clamp(0, h - 1) * w + xs.clamp(0, w - 1)).to(torch::kLong).view({n, 1, ho * wo});
      auto vals = flat.gather(2, idx.expand({n, c, ho * wo})).view({n, c, ho, wo});
      auto wgt = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
      wgt = torch::where(valid, wgt, torch::zeros_like(wgt));
      out = out + vals * wgt.unsqueeze(1);
    }
  }
  return out;
}

StnLocalizerImpl::StnLocalizerImpl(const StnOptions& options) : options_(options) {
  const auto& ch = options.channels;
  body_ = register_module(
      "body", torch::nn::Sequential(torch::nn::Conv2d(conv_options(3, ch[0], 7, 1, 3, true)), torch::nn::ReLU(),
                                    torch::nn::Conv2d(conv_options(ch[0], ch[1], 5, 1, 2, true)), torch::nn::ReLU(),
                                    torch::nn::Conv2d(conv_options(ch[1], ch[2], 3, 1, 1, true)), torch::nn::ReLU()));
  out_ = register_module("out", torch::nn::Conv2d(conv_options(ch[2], 6, 1, 1, 0, true)));
  torch::NoGradGuard guard;
  out_->weight.zero_();
  out_->bias.copy_(AffineParams::identity().to_tensor());
}

torch::Tensor StnLocalizerImpl::forward(const torch::Tensor& x) {
  require_shape(x, {{-1, 3, options_.patch, options_.patch}, TensorRole::image}, "STN localizer input");
  return out_(body_->forward(x)).mean({2, 3});
}

SpatialTransformerImpl::SpatialTransformerImpl(const StnOptions& options) {
  localizer_ = register_module("localizer", StnLocalizer(options));
}

torch::Tensor SpatialTransformerImpl::forward(const torch::Tensor& x) {
  theta_ = localizer_->forward(x);
  return resample(x, affine_grid(theta_, static_cast<int>(x.size(2)), static_cast<int>(x.size(3))));
}

}  // namespace hullscan::nn
