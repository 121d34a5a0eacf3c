#include "hullscan/raster/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <opencv2/imgproc.hpp>
#include <sstream>

#include "cv_interop.hpp"

namespace hullscan {

CropTransform::Point CropTransform::to_source(Point p) const {
  return {row0 + p.row * height / out_rows, col0 + p.col * width / out_cols};
}

CropTransform::Point CropTransform::to_frame(Point p) const {
  return {(p.row - row0) * out_rows / height, (p.col - col0) * out_cols / width};
}

CropTransform ship_crop(const BinaryMask& ship_mask, int out_rows, int out_cols) {
  int rmin = std::numeric_limits<int>::max(), rmax = -1;
  int cmin = std::numeric_limits<int>::max(), cmax = -1;
  for (int r = 0; r < ship_mask.rows(); ++r) {
    for (int c = 0; c < ship_mask.cols(); ++c) {
      if (!ship_mask.test(r, c)) continue;
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
  }
  if (rmax < 0) throw NoShipError("ship mask is empty");
  CropTransform t;
  t.row0 = rmin;
  t.col0 = cmin;
  t.height = rmax - rmin + 1;
  t.width = cmax - cmin + 1;
  t.src_rows = ship_mask.rows();
  t.src_cols = ship_mask.cols();
  t.out_rows = out_rows;
  t.out_cols = out_cols;
  return t;
}

RgbImage resize_image(const RgbImage& img, int rows, int cols) {
  if (img.same_shape(rows, cols)) return img;
  cv::Mat out;
  cv::resize(detail::view(img), out, cv::Size(cols, rows), 0, 0, cv::INTER_LINEAR);
  return detail::to_rgb(out);
}

namespace {

// Source index of the nearest pixel centre for destination index i.
inline int nearest_src(int i, int src_len, int dst_len) {
  const int s = static_cast<int>(std::floor((i + 0.5) * src_len / dst_len));
  return std::clamp(s, 0, src_len - 1);
}

template <typename Get, typename Set>
void nearest_resample(int src_rows, int src_cols, int rows, int cols, Get get, Set set) {
  std::vector<int> col_map(cols);
  for (int c = 0; c < cols; ++c) col_map[c] = nearest_src(c, src_cols, cols);
  for (int r = 0; r < rows; ++r) {
    const int sr = nearest_src(r, src_rows, rows);
    for (int c = 0; c < cols; ++c) set(r, c, get(sr, col_map[c]));
  }
}

}  // namespace

BinaryMask resize_mask(const BinaryMask& mask, int rows, int cols) {
  if (mask.rows() == rows && mask.cols() == cols) return mask;
  BinaryMask out(rows, cols);
  nearest_resample(
      mask.rows(), mask.cols(), rows, cols, [&](int r, int c) { return mask.test(r, c); },
      [&](int r, int c, bool v) { out.set(r, c, v); });
  return out;
}

SectionMap resize_sections(const SectionMap& map, int rows, int cols) {
  if (map.same_shape(rows, cols)) return map;
  SectionMap out(rows, cols);
  nearest_resample(
      map.rows(), map.cols(), rows, cols, [&](int r, int c) { return map.at(r, c); },
      [&](int r, int c, Section v) { out.at(r, c) = v; });
  return out;
}

RgbImage crop_image(const RgbImage& img, const CropTransform& t) {
  const cv::Mat roi = detail::view(img)(cv::Rect(t.col0, t.row0, t.width, t.height));
  cv::Mat out;
  cv::resize(roi, out, cv::Size(t.out_cols, t.out_rows), 0, 0, cv::INTER_LINEAR);
  return detail::to_rgb(out);
}

BinaryMask crop_mask(const BinaryMask& mask, const CropTransform& t) {
  require_same_shape(mask.rows(), mask.cols(), t.src_rows, t.src_cols, "crop_mask");
  BinaryMask out(t.out_rows, t.out_cols);
  nearest_resample(
      t.height, t.width, t.out_rows, t.out_cols,
      [&](int r, int c) { return mask.test(t.row0 + r, t.col0 + c); },
      [&](int r, int c, bool v) { out.set(r, c, v); });
  return out;
}

MaskSet crop_maskset(const MaskSet& masks, const CropTransform& t) {
  MaskSet out;
  for (int i = 0; i < 3; ++i) out.masks[i] = crop_mask(masks.masks[i], t);
  return out;
}

BoundaryPair crop_boundaries(const BoundaryPair& b, const CropTransform& t) {
  if (b.width() != t.src_cols) throw ShapeError("crop_boundaries: width mismatch");
  BoundaryPair out(t.out_cols);
  for (int j = 0; j < t.out_cols; ++j) {
    const int sc = t.col0 + nearest_src(j, t.width, t.out_cols);
    for (int i = 0; i < 2; ++i) {
      if (!b.valid[i][sc]) continue;
      const double y = (b.y[i][sc] * t.src_rows - t.row0) / t.height;
      if (y < 0.0 || y > 1.0) continue;
      out.y[i][j] = y;
      out.valid[i][j] = 1;
    }
  }
  return out;
}

namespace {

template <typename Get, typename Set>
void uncrop(const CropTransform& t, Get get, Set set) {
  for (int r = t.row0; r < t.row0 + t.height; ++r) {
    const int fr = nearest_src(r - t.row0, t.out_rows, t.height);
    for (int c = t.col0; c < t.col0 + t.width; ++c) {
      set(r, c, get(fr, nearest_src(c - t.col0, t.out_cols, t.width)));
    }
  }
}

}  // namespace

BinaryMask uncrop_mask(const BinaryMask& frame_mask, const CropTransform& t) {
  require_same_shape(frame_mask.rows(), frame_mask.cols(), t.out_rows, t.out_cols, "uncrop_mask");
  BinaryMask out(t.src_rows, t.src_cols);
  uncrop(
      t, [&](int r, int c) { return frame_mask.test(r, c); },
      [&](int r, int c, bool v) { out.set(r, c, v); });
  return out;
}

MaskSet uncrop_maskset(const MaskSet& frame_masks, const CropTransform& t) {
  MaskSet out;
  for (int i = 0; i < 3; ++i) out.masks[i] = uncrop_mask(frame_masks.masks[i], t);
  return out;
}

SectionMap uncrop_sections(const SectionMap& frame_map, const CropTransform& t) {
  require_same_shape(frame_map.rows(), frame_map.cols(), t.out_rows, t.out_cols,
                     "uncrop_sections");
  SectionMap out(t.src_rows, t.src_cols, Section::background);
  uncrop(
      t, [&](int r, int c) { return frame_map.at(r, c); },
      [&](int r, int c, Section v) { out.at(r, c) = v; });
  return out;
}

CroppedShip crop_resize_ship(const RgbImage& image, const BinaryMask& ship_mask, int out_rows,
                             int out_cols) {
  require_same_shape(image.rows(), image.cols(), ship_mask.rows(), ship_mask.cols(),
                     "crop_resize_ship");
  CroppedShip out;
  out.transform = ship_crop(ship_mask, out_rows, out_cols);
  out.image = crop_image(image, out.transform);
  return out;
}

void validate(const AugmentParams& p, int rows, int cols, const AugmentRanges& ranges) {
  auto fail = [](const std::string& field, double v, double limit) {
    std::ostringstream os;
    os << "augment: " << field << "=" << v << " outside +/-" << limit;
    throw std::invalid_argument(os.str());
  };
  if (!(std::abs(p.rotation_deg) <= ranges.max_rotation_deg))
    fail("rotation_deg", p.rotation_deg, ranges.max_rotation_deg);
  if (!(std::abs(p.dx) <= ranges.max_shift_frac * cols))
    fail("dx", p.dx, ranges.max_shift_frac * cols);
  if (!(std::abs(p.dy) <= ranges.max_shift_frac * rows))
    fail("dy", p.dy, ranges.max_shift_frac * rows);
}

namespace {

// OpenCV convention: pixel centres at integer coordinates.
cv::Matx23d motion_matrix(const AugmentParams& p, int rows, int cols) {
  const cv::Point2f centre((cols - 1) * 0.5f, (rows - 1) * 0.5f);
  cv::Mat m = cv::getRotationMatrix2D(centre, p.rotation_deg, 1.0);
  m.at<double>(0, 2) += p.dx;
  m.at<double>(1, 2) += p.dy;
  return cv::Matx23d(m);
}

bool is_identity_motion(const AugmentParams& p) {
  return p.rotation_deg == 0.0 && p.dx == 0.0 && p.dy == 0.0;
}

BoundaryPair move_boundaries(const BoundaryPair& b, const cv::Matx23d& m, int rows) {
  const int w = b.width();
  BoundaryPair out(w);
  for (int i = 0; i < 2; ++i) {
    std::vector<double> xs(w), ys(w);
    for (int j = 0; j < w; ++j) {
      if (!b.valid[i][j]) continue;
      const double x = j;
      const double y = b.y[i][j] * rows - 0.5;
      xs[j] = m(0, 0) * x + m(0, 1) * y + m(0, 2);
      ys[j] = m(1, 0) * x + m(1, 1) * y + m(1, 2);
    }
    auto place = [&](int k, double y_cv) {
      if (out.valid[i][k]) return;
      const double yn = (y_cv + 0.5) / rows;
      if (yn < 0.0 || yn > 1.0) return;
      out.y[i][k] = yn;
      out.valid[i][k] = 1;
    };
    for (int j = 0; j < w; ++j) {
      if (!b.valid[i][j]) continue;
      const double xr = std::round(xs[j]);
      if (std::abs(xs[j] - xr) < 1e-9 && xr >= 0 && xr < w) place(static_cast<int>(xr), ys[j]);
      if (j + 1 >= w || !b.valid[i][j + 1]) continue;
      const double x0 = xs[j], x1 = xs[j + 1];
      const double lo = std::min(x0, x1), hi = std::max(x0, x1);
      for (int k = std::max(0, static_cast<int>(std::ceil(lo)));
           k <= std::min(w - 1, static_cast<int>(std::floor(hi))); ++k) {
        const double t = hi > lo ? (k - x0) / (x1 - x0) : 0.0;
        place(k, ys[j] + t * (ys[j + 1] - ys[j]));
      }
    }
  }
  for (int j = 0; j < w; ++j) {
    if (out.valid[0][j] && out.valid[1][j]) out.y[1][j] = std::max(out.y[0][j], out.y[1][j]);
  }
  return out;
}

}  // namespace

RgbImage flip_channels(const RgbImage& image) {
  RgbImage out = image;
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) std::swap(out.at(r, c, 0), out.at(r, c, 2));
  return out;
}

Augmented augment(const RgbImage& image, const BoundaryPair& b, const AugmentParams& p,
                  const AugmentRanges& ranges) {
  validate(p, image.rows(), image.cols(), ranges);
  if (b.width() != image.cols()) throw ShapeError("augment: boundary width != image width");
  Augmented out;
  if (is_identity_motion(p)) {
    out.image = image;
    out.boundaries = b;
  } else {
    const cv::Matx23d m = motion_matrix(p, image.rows(), image.cols());
    cv::Mat warped;
    cv::warpAffine(detail::view(image), warped, cv::Mat(m), cv::Size(image.cols(), image.rows()),
                   cv::INTER_LINEAR, cv::BORDER_CONSTANT, cv::Scalar::all(0));
    out.image = detail::to_rgb(warped);
    out.boundaries = move_boundaries(b, m, image.rows());
  }
  if (p.channel_flip) out.image = flip_channels(out.image);
  return out;
}

BinaryMask augment_mask(const BinaryMask& mask, const AugmentParams& p) {
  if (is_identity_motion(p)) return mask;
  const cv::Matx23d m = motion_matrix(p, mask.rows(), mask.cols());
  cv::Mat warped;
  cv::warpAffine(detail::to_mat(mask), warped, cv::Mat(m), cv::Size(mask.cols(), mask.rows()),
                 cv::INTER_NEAREST, cv::BORDER_CONSTANT, cv::Scalar::all(0));
  return detail::to_mask(warped);
}

}  // namespace hullscan
