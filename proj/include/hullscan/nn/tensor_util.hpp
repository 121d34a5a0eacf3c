#pragma once

#include <torch/torch.h>

#include <span>
#include <string>
#include <vector>

#include "hullscan/raster/maskset.hpp"
#include "hullscan/raster/raster.hpp"

namespace hullscan::nn {

enum class TensorRole { image, feature, sequence, grid, logits };

/// Expected shape of a tensor at a block boundary; -1 matches any extent.
struct TensorSpec {
  std::vector<std::int64_t> shape;
  TensorRole role = TensorRole::feature;
};

/// Throws std::invalid_argument describing `where` when `t` does not match.
void require_shape(const torch::Tensor& t, const TensorSpec& spec, const std::string& where);

std::string shape_string(at::IntArrayRef sizes);

/// [3, H, W] float32, channels scaled to roughly zero mean and unit range.
torch::Tensor image_to_tensor(const RgbImage& image);
/// [N, 3, H, W].
torch::Tensor images_to_batch(std::span<const RgbImage* const> images);
/// [H, W] float32 of 0/1.
torch::Tensor mask_to_tensor(const BinaryMask& mask);
/// [3, H, W] float32 in Defect order.
torch::Tensor maskset_to_tensor(const MaskSet& masks);
/// Pixels of a [H, W] tensor strictly above `threshold`.
BinaryMask tensor_to_mask(const torch::Tensor& values, double threshold);

/// Seeds libtorch's generator and pins it to one intra-op thread so runs are
/// bit-reproducible on one machine.
void make_deterministic(std::uint64_t seed);

}  // namespace hullscan::nn
