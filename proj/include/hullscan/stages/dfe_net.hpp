#pragma once

#include <torch/torch.h>

#include <array>

#include "hullscan/nn/densenet.hpp"
#include "hullscan/nn/stn.hpp"

namespace hullscan::stages {

struct DfeNetOptions {
  nn::StnOptions stn;
  nn::DenseNetOptions extractor;
  bool use_stn = true;
  /// Separate delamination branch. Without it all three classifiers read GH.
  bool use_dfe = true;
  /// Single softmax head over the three classes on the general branch.
  bool multiclass = false;
  double dropout = 0.2;
  /// GH/DH hidden widths and the classifier hidden width.
  std::array<int, 3> head = {512, 256, 128};
  int patch = 64;
};

void validate(const DfeNetOptions& o);

/// Forward output. `p` is [N, 3] in classifier order (corrosion, fouling,
/// delamination). `f_d` is undefined without the delamination branch and
/// `logits` is defined only for the multi-class variant.
struct DfePrediction {
  torch::Tensor p;
  torch::Tensor f_g;
  torch::Tensor f_d;
  torch::Tensor logits;
};

/// Linear, ReLU, Dropout.
torch::nn::Sequential dense_relu_dropout(int in, int out, double dropout);

class DfeNetImpl : public torch::nn::Module {
 public:
  explicit DfeNetImpl(const DfeNetOptions& options = {});
  DfePrediction forward(const torch::Tensor& x);

  const DfeNetOptions& options() const { return options_; }
  int feature_dim() const { return options_.extractor.feature_dim(); }
  /// Input widths of the first GH and DH layers (DH is 0 without the branch).
  int gh_input() const { return gh_input_; }
  int dh_input() const { return dh_input_; }

 private:
  DfeNetOptions options_;
  int gh_input_ = 0;
  int dh_input_ = 0;
  nn::SpatialTransformer stn_g_{nullptr}, stn_d_{nullptr};
  nn::DenseFeatureExtractor extractor_g_{nullptr}, extractor_d_{nullptr};
  torch::nn::Sequential gh_{nullptr}, dh_{nullptr};
  std::array<torch::nn::Sequential, 3> classifiers_{nullptr, nullptr, nullptr};
  torch::nn::Sequential multiclass_{nullptr};
};
TORCH_MODULE(DfeNet);

}  // namespace hullscan::stages
