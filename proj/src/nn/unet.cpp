#include "hullscan/nn/unet.hpp"

#include <stdexcept>
#include <string>

#include "hullscan/nn/tensor_util.hpp"

namespace hullscan::nn {

namespace {

torch::nn::Sequential conv_bn_relu(int in, int out) {
  return torch::nn::Sequential(torch::nn::Conv2d(conv_options(in, out, 3)), torch::nn::BatchNorm2d(out),
                               torch::nn::ReLU());
}

torch::Tensor upsample2(const torch::Tensor& x) {
  namespace F = torch::nn::functional;
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .scale_factor(std::vector<double>{2.0, 2.0})
                               .mode(torch::kNearest));
}

}  // namespace

DecoderBlockImpl::DecoderBlockImpl(int in_channels, int skip_channels, int out_channels) {
  torch::nn::Sequential body;
  body->extend(*conv_bn_relu(in_channels + skip_channels, out_channels));
  body->extend(*conv_bn_relu(out_channels, out_channels));
  body_ = register_module("body", body);
}

torch::Tensor DecoderBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& skip) {
  auto y = upsample2(x);
  if (skip.defined()) y = torch::cat({y, skip}, 1);
  return body_->forward(y);
}

UNetImpl::UNetImpl(const UNetOptions& options) : options_(options) {
  encoder_ = register_module("encoder", ResNetEncoder(options.encoder));
  const auto ch = encoder_->channels();
  const std::array<int, 5> skips = {ch[2], ch[1], ch[0], encoder_->stem_channels(), 0};
  int in = ch[3];
  for (int i = 0; i < 5; ++i) {
    blocks_[i] = register_module("decoder" + std::to_string(i + 1), DecoderBlock(in, skips[i], options.decoder[i]));
    in = options.decoder[i];
  }
  head_ = register_module("head", torch::nn::Conv2d(conv_options(in, options.classes, 3, 1, 1, true)));
}

torch::Tensor UNetImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(1) != 3 || x.size(2) % 32 != 0 || x.size(3) % 32 != 0) {
    throw std::invalid_argument("UNet: input must be [N,3,H,W] with H, W divisible by 32, got " +
                                shape_string(x.sizes()));
  }
  const EncoderFeatures f = encoder_->forward(x);
  const std::array<torch::Tensor, 5> skips = {f.scales[2], f.scales[1], f.scales[0], f.stem, torch::Tensor()};
  auto y = f.scales[3];
  for (int i = 0; i < 5; ++i) y = blocks_[i]->forward(y, skips[i]);
  return head_(y);
}

}  // namespace hullscan::nn
