#include "hullscan/nn/densenet.hpp"

#include <stdexcept>
#include <string>

#include "hullscan/nn/resnet.hpp"
#include "hullscan/nn/tensor_util.hpp"

namespace hullscan::nn {

namespace {

int after_block(int channels, int layers, int growth) { return channels + layers * growth; }

}  // namespace

int DenseNetOptions::feature_dim() const {
  int c = init_features;
  for (int b = 0; b < 4; ++b) {
    c = after_block(c, blocks[b], growth);
    if (b < 3) c /= 2;
  }
  return c;
}

DenseLayerImpl::DenseLayerImpl(int in_channels, int growth, int bottleneck) {
  const int mid = bottleneck * growth;
  body_ = register_module(
      "body", torch::nn::Sequential(torch::nn::BatchNorm2d(in_channels), torch::nn::ReLU(),
                                    torch::nn::Conv2d(conv_options(in_channels, mid, 1, 1, 0)),
                                    torch::nn::BatchNorm2d(mid), torch::nn::ReLU(),
                                    torch::nn::Conv2d(conv_options(mid, growth, 3, 1, 1))));
}

torch::Tensor DenseLayerImpl::forward(const torch::Tensor& x) { return torch::cat({x, body_->forward(x)}, 1); }

DenseFeatureExtractorImpl::DenseFeatureExtractorImpl(const DenseNetOptions& options) : options_(options) {
  const int c0 = options.init_features;
  base_ = register_module(
      "base", torch::nn::Sequential(torch::nn::Conv2d(conv_options(3, c0, 7, 2, 3)), torch::nn::BatchNorm2d(c0),
                                    torch::nn::ReLU(),
                                    torch::nn::MaxPool2d(torch::nn::MaxPool2dOptions(3).stride(2).padding(1))));
  int c = c0;
  for (int b = 0; b < 4; ++b) {
    torch::nn::Sequential block;
    for (int l = 0; l < options.blocks[b]; ++l) block->push_back(DenseLayer(c + l * options.growth, options.growth, options.bottleneck));
    blocks_[b] = register_module("dense" + std::to_string(b + 1), block);
    c = after_block(c, options.blocks[b], options.growth);
    if (b < 3) {
      transitions_[b] = register_module(
          "transition" + std::to_string(b + 1),
          torch::nn::Sequential(torch::nn::BatchNorm2d(c), torch::nn::ReLU(),
                                torch::nn::Conv2d(conv_options(c, c / 2, 1, 1, 0)),
                                torch::nn::AvgPool2d(torch::nn::AvgPool2dOptions(2).stride(2))));
      c /= 2;
    }
  }
  norm_ = register_module("norm", torch::nn::BatchNorm2d(c));
  if (c != options.feature_dim()) throw std::logic_error("DenseFeatureExtractor: channel bookkeeping mismatch");
}

std::vector<std::array<std::int64_t, 3>> DenseFeatureExtractorImpl::expected_shapes(int size) const {
  std::vector<std::array<std::int64_t, 3>> shapes;
  std::int64_t s = (size + 1) / 2;  // stride-2 convolution, padding 3
  s = (s + 1) / 2;                  // max-pool, padding 1
  std::int64_t c = options_.init_features;
  shapes.push_back({c, s, s});
  for (int b = 0; b < 4; ++b) {
    c = after_block(static_cast<int>(c), options_.blocks[b], options_.growth);
    shapes.push_back({c, s, s});
    if (b < 3) {
      c /= 2;
      s /= 2;
      shapes.push_back({c, s, s});
    }
  }
  shapes.push_back({c, 1, 1});
  return shapes;
}

torch::Tensor DenseFeatureExtractorImpl::run(const torch::Tensor& x,
                                             std::vector<std::array<std::int64_t, 3>>* shapes) {
  require_shape(x, {{-1, 3, -1, -1}, TensorRole::image}, "dense_features input");
  if (x.size(2) < 32 || x.size(3) < 32) throw std::invalid_argument("dense_features: input smaller than 32x32");
  const bool square = x.size(2) == x.size(3);
  const auto expected = square ? expected_shapes(static_cast<int>(x.size(2)))
                               : std::vector<std::array<std::int64_t, 3>>{};
  std::size_t k = 0;
  auto note = [&](const torch::Tensor& t) {
    const std::array<std::int64_t, 3> got = {t.size(1), t.size(2), t.size(3)};
    if (square && got != expected[k]) {
      throw std::logic_error("dense_features: block " + std::to_string(k) + " produced " + shape_string(t.sizes()));
    }
    ++k;
    if (shapes) shapes->push_back(got);
  };
  auto y = base_->forward(x);
  note(y);
  for (int b = 0; b < 4; ++b) {
    y = blocks_[b]->forward(y);
    note(y);
    if (b < 3) {
      y = transitions_[b]->forward(y);
      note(y);
    }
  }
  y = torch::relu(norm_(y)).mean({2, 3}, true);
  note(y);
  return y.flatten(1);
}

torch::Tensor DenseFeatureExtractorImpl::forward(const torch::Tensor& x) {
  auto f = run(x, nullptr);
  require_shape(f, {{x.size(0), feature_dim()}, TensorRole::feature}, "dense_features output");
  return f;
}

std::vector<std::array<std::int64_t, 3>> DenseFeatureExtractorImpl::trace_shapes(const torch::Tensor& x) {
  std::vector<std::array<std::int64_t, 3>> shapes;
  run(x, &shapes);
  return shapes;
}

}  // namespace hullscan::nn
