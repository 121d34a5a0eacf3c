#pragma once

#include <torch/torch.h>

#include <array>
#include <vector>

#include "hullscan/nn/resnet.hpp"

namespace hullscan::nn {

/// Four stride-(2,1) convolutions that squeeze feature height, then fold the
/// remaining rows into channels: [N, C, h, w] -> [N, out * ceil(h / 16), w].
class HeightCompressImpl : public torch::nn::Module {
 public:
  HeightCompressImpl(int in_channels, int out_channels);
  torch::Tensor forward(const torch::Tensor& x);
  static int compressed_height(int h);

 private:
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(HeightCompress);

/// Linear map over the width axis: [N, C, w] -> [N, C, out_width].
class WidthAlignImpl : public torch::nn::Module {
 public:
  WidthAlignImpl(int in_width, int out_width);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Linear map_{nullptr};
};
TORCH_MODULE(WidthAlign);

/// Bidirectional LSTM over the aligned width steps. Each step emits
/// `columns_per_step` columns for both boundaries: [N, C, S] -> [N, 2, S * columns_per_step]
/// in (0, 1).
class SequenceSmootherImpl : public torch::nn::Module {
 public:
  SequenceSmootherImpl(int features, int hidden, int columns_per_step);
  torch::Tensor forward(const torch::Tensor& x);
  /// Copies the forward-direction LSTM weights into the backward direction so
  /// that reversing the sequence reverses the output.
  void make_symmetric();

 private:
  int columns_per_step_;
  torch::nn::LSTM lstm_{nullptr};
  torch::nn::Linear head_{nullptr};
};
TORCH_MODULE(SequenceSmoother);

struct SectionNetOptions {
  ResNetOptions encoder;
  int frame_rows = 480;
  int frame_cols = 640;
  /// Per-scale compressed widths; with 480-row frames each scale yields 64 features.
  std::array<int, 4> compress = {8, 16, 32, 64};
  int steps = 160;
  int hidden = 256;
};

/// Boundary regressor: image [N, 3, rows, cols] -> [N, 2, cols] normalized y.
class SectionNetImpl : public torch::nn::Module {
 public:
  explicit SectionNetImpl(const SectionNetOptions& options = {});
  torch::Tensor forward(const torch::Tensor& x);
  /// Size of the fused feature sequence fed to the smoother.
  int sequence_features() const { return features_; }
  /// Shapes after each block, in order: encoder scales, compressed scales,
  /// aligned scales, fused sequence, output.
  std::vector<std::vector<std::int64_t>> trace_shapes(const torch::Tensor& x);
  const SectionNetOptions& options() const { return options_; }

 private:
  SectionNetOptions options_;
  int features_ = 0;
  std::vector<torch::Tensor> run(const torch::Tensor& x, std::vector<std::vector<std::int64_t>>* shapes);

  ResNetEncoder encoder_{nullptr};
  std::array<HeightCompress, 4> compress_{nullptr, nullptr, nullptr, nullptr};
  std::array<WidthAlign, 4> align_{nullptr, nullptr, nullptr, nullptr};
  SequenceSmoother smoother_{nullptr};
};
TORCH_MODULE(SectionNet);

}  // namespace hullscan::nn
