#include "hullscan/stages/dfe_net.hpp"

#include <stdexcept>
#include <string>

#include "hullscan/nn/tensor_util.hpp"

namespace hullscan::stages {

void validate(const DfeNetOptions& o) {
  if (o.patch < 32) throw std::invalid_argument("DfeNetOptions: patch must be >= 32");
  if (!(o.dropout >= 0.0 && o.dropout < 1.0)) throw std::invalid_argument("DfeNetOptions: dropout must be in [0, 1)");
  for (int h : o.head)
    if (h < 1) throw std::invalid_argument("DfeNetOptions: head widths must be positive");
  if (o.multiclass && o.use_dfe) throw std::invalid_argument("DfeNetOptions: the multi-class head uses the general branch only");
}

torch::nn::Sequential dense_relu_dropout(int in, int out, double dropout) {
  return torch::nn::Sequential(torch::nn::Linear(in, out), torch::nn::ReLU(), torch::nn::Dropout(dropout));
}

namespace {

torch::nn::Sequential chain(std::initializer_list<torch::nn::Sequential> parts) {
  torch::nn::Sequential out;
  for (const auto& p : parts) out->extend(*p);
  return out;
}

torch::nn::Sequential with_linear(torch::nn::Sequential s, int in, int out) {
  s->push_back(torch::nn::Linear(in, out));
  return s;
}

std::int64_t first_in(const torch::nn::Sequential& s) {
  return s->ptr(0)->as<torch::nn::Linear>()->options.in_features();
}

}  // namespace

DfeNetImpl::DfeNetImpl(const DfeNetOptions& options) : options_(options) {
  validate(options);
  const int f = feature_dim();
  const auto& h = options.head;
  nn::StnOptions stn = options.stn;
  stn.patch = options.patch;
  if (options.use_stn) stn_g_ = register_module("stn_g", nn::SpatialTransformer(stn));
  extractor_g_ = register_module("extractor_g", nn::DenseFeatureExtractor(options.extractor));
  gh_input_ = f;
  gh_ = register_module("gh", chain({dense_relu_dropout(f, h[0], options.dropout),
                                                    dense_relu_dropout(h[0], h[1], options.dropout)}));
  if (options.use_dfe) {
    if (options.use_stn) stn_d_ = register_module("stn_d", nn::SpatialTransformer(stn));
    extractor_d_ = register_module("extractor_d", nn::DenseFeatureExtractor(options.extractor));
    dh_input_ = 2 * f;
    dh_ = register_module("dh", chain({dense_relu_dropout(dh_input_, h[0], options.dropout),
                                                      dense_relu_dropout(h[0], h[1], options.dropout)}));
  }
  if (options.multiclass) {
    multiclass_ = register_module("multiclass", with_linear(dense_relu_dropout(h[1], h[2], options.dropout), h[2], 3));
  } else {
    for (int k = 0; k < 3; ++k) {
      classifiers_[k] = register_module("c" + std::to_string(k + 1),
                                        with_linear(dense_relu_dropout(h[1], h[2], options.dropout), h[2], 1));
    }
  }
  if (first_in(gh_) != f) throw std::logic_error("DfeNet: GH input width mismatch");
  if (dh_ && first_in(dh_) != 2 * f) throw std::logic_error("DfeNet: DH input width mismatch");
}

DfePrediction DfeNetImpl::forward(const torch::Tensor& x) {
  nn::require_shape(x, {{-1, 3, options_.patch, options_.patch}, nn::TensorRole::image}, "DfeNet input");
  DfePrediction out;
  out.f_g = extractor_g_->forward(stn_g_ ? stn_g_->forward(x) : x);
  auto hg = gh_->forward(out.f_g);
  if (multiclass_) {
    out.logits = multiclass_->forward(hg);
    out.p = torch::softmax(out.logits, 1);
    return out;
  }
  auto p1 = classifiers_[0]->forward(hg);
  auto p2 = classifiers_[1]->forward(hg);
  torch::Tensor p3;
  if (dh_) {
    out.f_d = extractor_d_->forward(stn_d_ ? stn_d_->forward(x) : x);
    p3 = classifiers_[2]->forward(dh_->forward(torch::cat({out.f_g, out.f_d}, 1)));
  } else {
    p3 = classifiers_[2]->forward(hg);
  }
  out.p = torch::sigmoid(torch::cat({p1, p2, p3}, 1));
  return out;
}

}  // namespace hullscan::stages
