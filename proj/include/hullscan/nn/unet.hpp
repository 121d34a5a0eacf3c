#pragma once

#include <torch/torch.h>

#include <array>

#include "hullscan/nn/resnet.hpp"

namespace hullscan::nn {

struct UNetOptions {
  ResNetOptions encoder;
  /// Decoder widths from the deepest block (stride 16) to full resolution.
  std::array<int, 5> decoder = {256, 128, 64, 32, 16};
  int classes = 1;
};

class DecoderBlockImpl : public torch::nn::Module {
 public:
  DecoderBlockImpl(int in_channels, int skip_channels, int out_channels);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& skip);

 private:
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(DecoderBlock);

/// Encoder-decoder segmenter over a residual backbone with skip connections.
/// Input [N, 3, H, W] with H and W divisible by 32; output [N, classes, H, W] logits.
class UNetImpl : public torch::nn::Module {
 public:
  explicit UNetImpl(const UNetOptions& options = {});
  torch::Tensor forward(const torch::Tensor& x);
  const UNetOptions& options() const { return options_; }

 private:
  UNetOptions options_;
  ResNetEncoder encoder_{nullptr};
  std::array<DecoderBlock, 5> blocks_{nullptr, nullptr, nullptr, nullptr, nullptr};
  torch::nn::Conv2d head_{nullptr};
};
TORCH_MODULE(UNet);

}  // namespace hullscan::nn
