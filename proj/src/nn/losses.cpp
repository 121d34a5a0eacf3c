#include "hullscan/nn/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "hullscan/nn/tensor_util.hpp"

namespace hullscan::nn {

torch::Tensor range_aware_loss(const torch::Tensor& pred, const torch::Tensor& target, const torch::Tensor& mask) {
  if (!pred.sizes().equals(target.sizes()) || !pred.sizes().equals(mask.sizes())) {
    throw std::invalid_argument("range_aware_loss: shape mismatch " + shape_string(pred.sizes()) + " / " +
                                shape_string(target.sizes()) + " / " + shape_string(mask.sizes()));
  }
  auto m = mask.to(torch::kBool);
  // Masked targets may hold anything (even NaN); keep them out of the graph.
  auto t = torch::where(m, target, pred.detach());
  return torch::where(m, (t - pred).abs(), torch::zeros_like(pred)).sum();
}

double range_aware_loss(const BoundaryPair& pred, const BoundaryPair& target) {
  if (pred.width() != target.width()) throw std::invalid_argument("range_aware_loss: width mismatch");
  double total = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < target.width(); ++j)
      if (target.valid[i][j]) total += std::abs(target.y[i][j] - pred.y[i][j]);
  return total;
}

torch::Tensor bce(const torch::Tensor& labels, const torch::Tensor& p, double clamp) {
  auto q = p.clamp(clamp, 1.0 - clamp);
  return -(labels * torch::log(q) + (1.0 - labels) * torch::log(1.0 - q));
}

double bce(double label, double p, double clamp) {
  const double q = std::clamp(p, clamp, 1.0 - clamp);
  return -(label * std::log(q) + (1.0 - label) * std::log(1.0 - q));
}

torch::Tensor cosine_similarity(const torch::Tensor& x, const torch::Tensor& y, double eps) {
  if (!x.sizes().equals(y.sizes())) throw std::invalid_argument("cosine_similarity: length mismatch");
  auto dot = (x * y).sum(-1);
  auto norms = torch::linalg_vector_norm(x, 2, {-1}) * torch::linalg_vector_norm(y, 2, {-1});
  return dot / norms.clamp_min(eps);
}

double cosine_similarity(std::span<const double> x, std::span<const double> y, double eps) {
  if (x.size() != y.size()) throw std::invalid_argument("cosine_similarity: length mismatch");
  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  return dot / std::max(std::sqrt(xx) * std::sqrt(yy), eps);
}

void validate(const ClsLossConfig& cfg) {
  for (double w : cfg.w)
    if (!(w > 0.0)) throw std::invalid_argument("ClsLossConfig: weights must be positive");
  if (!(cfg.lambda >= 0.0)) throw std::invalid_argument("ClsLossConfig: lambda must be >= 0");
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("ClsLossConfig: eps must be positive");
  if (!(cfg.prob_clamp > 0.0 && cfg.prob_clamp < 0.5)) throw std::invalid_argument("ClsLossConfig: bad prob_clamp");
}

torch::Tensor classification_loss(const torch::Tensor& labels, const torch::Tensor& p, const torch::Tensor& f_g,
                                  const torch::Tensor& f_d, const ClsLossConfig& cfg) {
  require_shape(p, {{-1, 3}, TensorRole::logits}, "classification_loss p");
  require_shape(labels, {{p.size(0), 3}, TensorRole::logits}, "classification_loss labels");
  auto w = torch::tensor({cfg.w[0], cfg.w[1], cfg.w[2]}, p.options().requires_grad(false));
  auto per_sample = (bce(labels, p, cfg.prob_clamp) * w).sum(1);
  if (f_d.defined() && cfg.lambda != 0.0) {
    per_sample = per_sample + cfg.lambda * cosine_similarity(f_g, f_d, cfg.eps).abs();
  }
  return per_sample.mean();
}

}  // namespace hullscan::nn
