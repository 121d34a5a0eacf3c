#include "hullscan/nn/horizon.hpp"

#include <stdexcept>
#include <string>

#include "hullscan/nn/tensor_util.hpp"

namespace hullscan::nn {

HeightCompressImpl::HeightCompressImpl(int in_channels, int out_channels) {
  torch::nn::Sequential body;
  int in = in_channels;
  for (int i = 0; i < 4; ++i) {
    const int out = i == 3 ? out_channels : std::max(out_channels, in / 2);
    body->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).stride({2, 1}).padding(1).bias(false)));
    body->push_back(torch::nn::BatchNorm2d(out));
    body->push_back(torch::nn::ReLU());
    in = out;
  }
  body_ = register_module("body", body);
}

int HeightCompressImpl::compressed_height(int h) {
  for (int i = 0; i < 4; ++i) h = (h + 1) / 2;
  return h;
}

torch::Tensor HeightCompressImpl::forward(const torch::Tensor& x) {
  auto y = body_->forward(x);
  return y.reshape({y.size(0), y.size(1) * y.size(2), y.size(3)});
}

WidthAlignImpl::WidthAlignImpl(int in_width, int out_width) {
  map_ = register_module("map", torch::nn::Linear(in_width, out_width));
}

torch::Tensor WidthAlignImpl::forward(const torch::Tensor& x) { return map_(x); }

SequenceSmootherImpl::SequenceSmootherImpl(int features, int hidden, int columns_per_step)
    : columns_per_step_(columns_per_step) {
  lstm_ = register_module(
      "lstm", torch::nn::LSTM(torch::nn::LSTMOptions(features, hidden).bidirectional(true).batch_first(true)));
  head_ = register_module("head", torch::nn::Linear(2 * hidden, 2 * columns_per_step));
}

torch::Tensor SequenceSmootherImpl::forward(const torch::Tensor& x) {
  const auto n = x.size(0);
  const auto steps = x.size(2);
  auto seq = std::get<0>(lstm_->forward(x.permute({0, 2, 1})));  // [N, S, 2H]
  auto y = head_(seq).reshape({n, steps, 2, columns_per_step_});
  return torch::sigmoid(y.permute({0, 2, 1, 3}).reshape({n, 2, steps * columns_per_step_}));
}

void SequenceSmootherImpl::make_symmetric() {
  torch::NoGradGuard guard;
  auto params = lstm_->named_parameters();
  for (const char* name : {"weight_ih_l0", "weight_hh_l0", "bias_ih_l0", "bias_hh_l0"}) {
    params[std::string(name) + "_reverse"].copy_(params[name]);
  }
  // Rows of the head are (boundary, column); the backward half reads the
  // forward half with columns mirrored inside each step.
  const auto hidden = head_->weight.size(1) / 2;
  auto w = head_->weight.view({2, columns_per_step_, 2 * hidden});
  w.narrow(2, hidden, hidden).copy_(w.narrow(2, 0, hidden).flip({1}).clone());
  auto b = head_->bias.view({2, columns_per_step_});
  b.copy_(((b + b.flip({1})) / 2).clone());
}

SectionNetImpl::SectionNetImpl(const SectionNetOptions& options) : options_(options) {
  if (options.frame_rows % 32 != 0 || options.frame_cols % 32 != 0) {
    throw std::invalid_argument("SectionNet: frame size must be divisible by 32");
  }
  if (options.frame_cols % options.steps != 0) {
    throw std::invalid_argument("SectionNet: frame width must be a multiple of the step count");
  }
  encoder_ = register_module("encoder", ResNetEncoder(options.encoder));
  const auto ch = encoder_->channels();
  int h = options.frame_rows / 4;
  int w = options.frame_cols / 4;
  for (int s = 0; s < 4; ++s) {
    const std::string tag = std::to_string(s + 1);
    compress_[s] = register_module("compress" + tag, HeightCompress(ch[s], options.compress[s]));
    align_[s] = register_module("align" + tag, WidthAlign(w, options.steps));
    features_ += options.compress[s] * HeightCompressImpl::compressed_height(h);
    h /= 2;
    w /= 2;
  }
  smoother_ = register_module("smoother",
                              SequenceSmoother(features_, options.hidden, options.frame_cols / options.steps));
}

std::vector<torch::Tensor> SectionNetImpl::run(const torch::Tensor& x,
                                                std::vector<std::vector<std::int64_t>>* shapes) {
  require_shape(x, {{-1, 3, options_.frame_rows, options_.frame_cols}, TensorRole::image}, "SectionNet input");
  const auto f = encoder_->forward(x);
  auto note = [&](const torch::Tensor& t) {
    if (shapes) shapes->push_back(t.sizes().vec());
  };
  for (const auto& t : f.scales) note(t);
  std::vector<torch::Tensor> parts;
  for (int s = 0; s < 4; ++s) {
    auto c = compress_[s]->forward(f.scales[s]);
    note(c);
    parts.push_back(align_[s]->forward(c));
  }
  for (const auto& p : parts) note(p);
  auto fused = torch::cat(parts, 1);
  note(fused);
  require_shape(fused, {{-1, features_, options_.steps}, TensorRole::sequence}, "SectionNet fused sequence");
  auto out = smoother_->forward(fused);
  note(out);
  require_shape(out, {{-1, 2, options_.frame_cols}, TensorRole::sequence}, "SectionNet output");
  return {out};
}

torch::Tensor SectionNetImpl::forward(const torch::Tensor& x) { return run(x, nullptr)[0]; }

std::vector<std::vector<std::int64_t>> SectionNetImpl::trace_shapes(const torch::Tensor& x) {
  std::vector<std::vector<std::int64_t>> shapes;
  run(x, &shapes);
  return shapes;
}

}  // namespace hullscan::nn
