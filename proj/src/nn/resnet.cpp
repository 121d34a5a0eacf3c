#include "hullscan/nn/resnet.hpp"

#include <string>

namespace hullscan::nn {

torch::nn::Conv2dOptions conv_options(int in, int out, int kernel, int stride, int padding, bool bias) {
  return torch::nn::Conv2dOptions(in, out, kernel)
      .stride(stride)
      .padding(padding < 0 ? kernel / 2 : padding)
      .bias(bias);
}

BasicBlockImpl::BasicBlockImpl(int in_channels, int out_channels, int stride) {
  conv1_ = register_module("conv1", torch::nn::Conv2d(conv_options(in_channels, out_channels, 3, stride)));
  bn1_ = register_module("bn1", torch::nn::BatchNorm2d(out_channels));
  conv2_ = register_module("conv2", torch::nn::Conv2d(conv_options(out_channels, out_channels, 3)));
  bn2_ = register_module("bn2", torch::nn::BatchNorm2d(out_channels));
  if (stride != 1 || in_channels != out_channels) {
    shortcut_ = register_module(
        "shortcut", torch::nn::Sequential(torch::nn::Conv2d(conv_options(in_channels, out_channels, 1, stride, 0)),
                                          torch::nn::BatchNorm2d(out_channels)));
  }
}

torch::Tensor BasicBlockImpl::forward(const torch::Tensor& x) {
  auto y = torch::relu(bn1_(conv1_(x)));
  y = bn2_(conv2_(y));
  return torch::relu(y + (shortcut_ ? shortcut_->forward(x) : x));
}

ResNetEncoderImpl::ResNetEncoderImpl(const ResNetOptions& options) : options_(options) {
  const int w = options.base_width;
  stem_ = register_module("stem", torch::nn::Sequential(torch::nn::Conv2d(conv_options(3, w, 7, 2, 3)),
                                                        torch::nn::BatchNorm2d(w), torch::nn::ReLU()));
  pool_ = register_module("pool", torch::nn::MaxPool2d(torch::nn::MaxPool2dOptions(3).stride(2).padding(1)));
  int in = w;
  const auto ch = channels();
  for (int s = 0; s < 4; ++s) {
    torch::nn::Sequential layer;
    for (int b = 0; b < options.blocks[s]; ++b) {
      layer->push_back(BasicBlock(b == 0 ? in : ch[s], ch[s], (b == 0 && s > 0) ? 2 : 1));
    }
    in = ch[s];
    layers_[s] = register_module("layer" + std::to_string(s + 1), layer);
  }
}

std::array<int, 4> ResNetEncoderImpl::channels() const {
  const int w = options_.base_width;
  return {w, 2 * w, 4 * w, 8 * w};
}

EncoderFeatures ResNetEncoderImpl::forward(const torch::Tensor& x) {
  EncoderFeatures f;
  f.stem = stem_->forward(x);
  auto y = pool_(f.stem);
  for (int s = 0; s < 4; ++s) {
    y = layers_[s]->forward(y);
    f.scales[s] = y;
  }
  return f;
}

}  // namespace hullscan::nn
