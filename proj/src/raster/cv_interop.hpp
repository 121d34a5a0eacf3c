#pragma once

#include <opencv2/core.hpp>

#include "hullscan/raster/raster.hpp"

namespace hullscan::detail {

// Wraps the raster's storage without copying; the Mat must not outlive it.
inline cv::Mat view(const RgbImage& img) {
  return cv::Mat(img.rows(), img.cols(), CV_8UC3, const_cast<std::uint8_t*>(img.data().data()));
}

inline RgbImage to_rgb(const cv::Mat& m) {
  CV_Assert(m.type() == CV_8UC3);
  RgbImage out(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r) {
    const auto* src = m.ptr<std::uint8_t>(r);
    std::copy(src, src + 3 * m.cols, out.data().data() + static_cast<std::size_t>(r) * m.cols * 3);
  }
  return out;
}

inline cv::Mat to_mat(const BinaryMask& mask) {
  cv::Mat m(mask.rows(), mask.cols(), CV_8UC1);
  std::copy(mask.data().begin(), mask.data().end(), m.data);
  return m;
}

inline BinaryMask to_mask(const cv::Mat& m) {
  CV_Assert(m.type() == CV_8UC1);
  cv::Mat c = m.isContinuous() ? m : m.clone();
  return BinaryMask::from_bytes(c.rows, c.cols, {c.data, c.total()});
}

}  // namespace hullscan::detail
