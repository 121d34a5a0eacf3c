#pragma once

#include <torch/torch.h>

#include <array>

namespace hullscan::nn {

/// Residual backbone with the ResNet-34 layout by default.
struct ResNetOptions {
  int base_width = 64;
  std::array<int, 4> blocks = {3, 4, 6, 3};
};

class BasicBlockImpl : public torch::nn::Module {
 public:
  BasicBlockImpl(int in_channels, int out_channels, int stride);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr};
  torch::nn::BatchNorm2d bn1_{nullptr}, bn2_{nullptr};
  torch::nn::Sequential shortcut_{nullptr};
};
TORCH_MODULE(BasicBlock);

/// Multi-scale output of the encoder.
struct EncoderFeatures {
  torch::Tensor stem;  ///< stride 2
  std::array<torch::Tensor, 4> scales;  ///< strides 4, 8, 16, 32
};

class ResNetEncoderImpl : public torch::nn::Module {
 public:
  explicit ResNetEncoderImpl(const ResNetOptions& options = {});
  EncoderFeatures forward(const torch::Tensor& x);

  int stem_channels() const { return options_.base_width; }
  /// Channels of the four scales.
  std::array<int, 4> channels() const;

 private:
  ResNetOptions options_;
  torch::nn::Sequential stem_{nullptr};
  torch::nn::MaxPool2d pool_{nullptr};
  std::array<torch::nn::Sequential, 4> layers_{nullptr, nullptr, nullptr, nullptr};
};
TORCH_MODULE(ResNetEncoder);

torch::nn::Conv2dOptions conv_options(int in, int out, int kernel, int stride = 1, int padding = -1,
                                      bool bias = false);

}  // namespace hullscan::nn
