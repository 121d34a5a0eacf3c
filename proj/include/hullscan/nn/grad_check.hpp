#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <functional>
#include <string>

namespace hullscan::nn {

struct GradCheckReport {
  bool passed = false;
  double max_rel_error = 0.0;
  std::int64_t worst_index = -1;
  std::int64_t checked = 0;
  std::string summary() const;
};

struct GradCheckOptions {
  double step = 1e-4;
  double tol = 1e-3;
  /// Check at most this many input elements, spread evenly; 0 checks all.
  std::int64_t max_elements = 0;
};

using ScalarFn = std::function<torch::Tensor(const torch::Tensor&)>;

/// Compares autograd against central differences in double precision. The
/// relative error of element k is |a_k - n_k| / max(|a_k|, |n_k|, 1e-3 * max_j |n_j|, 1e-12).
/// Throws std::domain_error when the function or a gradient is not finite.
GradCheckReport grad_check(const ScalarFn& fn, const torch::Tensor& input, const GradCheckOptions& options = {});

}  // namespace hullscan::nn
