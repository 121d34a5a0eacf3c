#include "hullscan/nn/grad_check.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hullscan::nn {

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << (passed ? "pass" : "FAIL") << " max_rel_error=" << max_rel_error << " worst_index=" << worst_index
     << " checked=" << checked;
  return os.str();
}

namespace {

double eval(const ScalarFn& fn, const torch::Tensor& x) {
  torch::NoGradGuard guard;
  auto y = fn(x);
  if (y.numel() != 1) throw std::invalid_argument("grad_check: function must return a scalar");
  const double v = y.item<double>();
  if (!std::isfinite(v)) throw std::domain_error("grad_check: non-finite function value");
  return v;
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& fn, const torch::Tensor& input, const GradCheckOptions& options) {
  auto x = input.detach().to(torch::kFloat64).contiguous().clone().requires_grad_(true);
  auto y = fn(x);
  if (y.numel() != 1) throw std::invalid_argument("grad_check: function must return a scalar");
  if (!std::isfinite(y.item<double>())) throw std::domain_error("grad_check: non-finite function value");
  torch::Tensor analytic;
  if (y.requires_grad()) {
    auto grads = torch::autograd::grad({y}, {x}, {}, false, false, true);
    analytic = grads[0].defined() ? grads[0] : torch::zeros_like(x);
  } else {
    analytic = torch::zeros_like(x);
  }
  analytic = analytic.detach().contiguous();
  if (!torch::isfinite(analytic).all().item<bool>()) throw std::domain_error("grad_check: non-finite gradient");

  const std::int64_t n = x.numel();
  std::vector<std::int64_t> indices;
  if (options.max_elements <= 0 || options.max_elements >= n) {
    for (std::int64_t i = 0; i < n; ++i) indices.push_back(i);
  } else {
    for (std::int64_t k = 0; k < options.max_elements; ++k) indices.push_back(k * n / options.max_elements);
  }

  auto probe = x.detach().clone();
  auto flat = probe.view({-1});
  const double* a = analytic.data_ptr<double>();
  std::vector<double> numeric(indices.size());
  double scale = 0.0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto i = indices[k];
    const double orig = flat[i].item<double>();
    flat[i] = orig + options.step;
    const double fp = eval(fn, probe);
    flat[i] = orig - options.step;
    const double fm = eval(fn, probe);
    flat[i] = orig;
    numeric[k] = (fp - fm) / (2.0 * options.step);
    scale = std::max(scale, std::abs(numeric[k]));
  }

  GradCheckReport report;
  report.checked = static_cast<std::int64_t>(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const double an = a[indices[k]];
    const double denom = std::max({std::abs(an), std::abs(numeric[k]), 1e-3 * scale, 1e-12});
    const double rel = std::abs(an - numeric[k]) / denom;
    if (rel > report.max_rel_error || report.worst_index < 0) {
      report.max_rel_error = rel;
      report.worst_index = indices[k];
    }
  }
  report.passed = report.max_rel_error <= options.tol;
  return report;
}

}  // namespace hullscan::nn
