#include "hullscan/nn/tensor_util.hpp"

#include <sstream>
#include <stdexcept>

namespace hullscan::nn {

std::string shape_string(at::IntArrayRef sizes) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < sizes.size(); ++i) os << (i ? "," : "") << sizes[i];
  os << "]";
  return os.str();
}

void require_shape(const torch::Tensor& t, const TensorSpec& spec, const std::string& where) {
  bool ok = t.defined() && t.dim() == static_cast<std::int64_t>(spec.shape.size());
  for (std::size_t i = 0; ok && i < spec.shape.size(); ++i)
    ok = spec.shape[i] < 0 || t.size(static_cast<std::int64_t>(i)) == spec.shape[i];
  if (!ok) {
    throw std::invalid_argument(where + ": expected shape " + shape_string(spec.shape) + ", got " +
                                (t.defined() ? shape_string(t.sizes()) : std::string("undefined")));
  }
}

torch::Tensor image_to_tensor(const RgbImage& image) {
  auto bytes = torch::from_blob(const_cast<std::uint8_t*>(image.data().data()),
                                {image.rows(), image.cols(), 3}, torch::kUInt8);
  return bytes.permute({2, 0, 1}).to(torch::kFloat32).div(255.0).sub(0.5).div(0.25).contiguous();
}

torch::Tensor images_to_batch(std::span<const RgbImage* const> images) {
  std::vector<torch::Tensor> ts;
  ts.reserve(images.size());
  for (const RgbImage* img : images) ts.push_back(image_to_tensor(*img));
  return torch::stack(ts);
}

torch::Tensor mask_to_tensor(const BinaryMask& mask) {
  auto bytes = torch::from_blob(const_cast<std::uint8_t*>(mask.data().data()),
                                {mask.rows(), mask.cols()}, torch::kUInt8);
  return bytes.to(torch::kFloat32);
}

torch::Tensor maskset_to_tensor(const MaskSet& masks) {
  return torch::stack({mask_to_tensor(masks.masks[0]), mask_to_tensor(masks.masks[1]),
                       mask_to_tensor(masks.masks[2])});
}

BinaryMask tensor_to_mask(const torch::Tensor& values, double threshold) {
  if (values.dim() != 2) throw std::invalid_argument("tensor_to_mask: expected [H, W]");
  auto bytes = values.gt(threshold).to(torch::kUInt8).contiguous();
  return BinaryMask::from_bytes(static_cast<int>(values.size(0)), static_cast<int>(values.size(1)),
                                {bytes.data_ptr<std::uint8_t>(), static_cast<std::size_t>(bytes.numel())});
}

void make_deterministic(std::uint64_t seed) {
  torch::set_num_threads(1);
  torch::manual_seed(seed);
}

}  // namespace hullscan::nn
