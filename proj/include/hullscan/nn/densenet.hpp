#pragma once

#include <torch/torch.h>

#include <array>
#include <vector>

namespace hullscan::nn {

/// Densely connected feature extractor. Defaults give the 121-layer layout
/// with a 1024-long output.
struct DenseNetOptions {
  int init_features = 64;
  int growth = 32;
  std::array<int, 4> blocks = {6, 12, 24, 16};
  int bottleneck = 4;

  int feature_dim() const;
};

enum class FeatureSource { general, delamination };

class DenseLayerImpl : public torch::nn::Module {
 public:
  DenseLayerImpl(int in_channels, int growth, int bottleneck);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(DenseLayer);

/// [N, 3, H, W] -> [N, feature_dim]. Any H, W >= 32.
class DenseFeatureExtractorImpl : public torch::nn::Module {
 public:
  explicit DenseFeatureExtractorImpl(const DenseNetOptions& options = {});
  torch::Tensor forward(const torch::Tensor& x);
  int feature_dim() const { return options_.feature_dim(); }

  /// [C, H, W] after the base, each dense block and transition, and the final
  /// pool, for a square input of side `size`.
  std::vector<std::array<std::int64_t, 3>> expected_shapes(int size) const;
  /// The same shapes as observed by running `x`.
  std::vector<std::array<std::int64_t, 3>> trace_shapes(const torch::Tensor& x);

 private:
  torch::Tensor run(const torch::Tensor& x, std::vector<std::array<std::int64_t, 3>>* shapes);

  DenseNetOptions options_;
  torch::nn::Sequential base_{nullptr};
  std::array<torch::nn::Sequential, 4> blocks_{nullptr, nullptr, nullptr, nullptr};
  std::array<torch::nn::Sequential, 3> transitions_{nullptr, nullptr, nullptr};
  torch::nn::BatchNorm2d norm_{nullptr};
};
TORCH_MODULE(DenseFeatureExtractor);

}  // namespace hullscan::nn
