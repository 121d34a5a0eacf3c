#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hullscan {

/// Thrown when two rasters that must share a shape do not.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Row-major, interleaved-channel raster with value semantics.
template <typename T, int Channels>
class Grid {
 public:
  static_assert(Channels >= 1);
  using value_type = T;
  static constexpr int kChannels = Channels;

  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * cols * Channels, fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Grid: negative dimension");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  std::size_t pixel_count() const { return static_cast<std::size_t>(rows_) * cols_; }

  T& at(int r, int c, int ch = 0) { return data_[index(r, c, ch)]; }
  const T& at(int r, int c, int ch = 0) const { return data_[index(r, c, ch)]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_shape(int rows, int cols) const { return rows_ == rows && cols_ == cols; }
  template <typename U, int C>
  bool same_shape(const Grid<U, C>& other) const {
    return same_shape(other.rows(), other.cols());
  }

  /// Copy of the window [r0, r0+h) x [c0, c0+w); out-of-range reads reflect.
  Grid crop_reflect(int r0, int c0, int h, int w) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int r, int c, int ch) const {
    return (static_cast<std::size_t>(r) * cols_ + c) * Channels + ch;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

/// Symmetric reflection (abc|cba) of an index into [0, n).
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

template <typename T, int Channels>
Grid<T, Channels> Grid<T, Channels>::crop_reflect(int r0, int c0, int h, int w) const {
  if (empty()) throw std::invalid_argument("crop_reflect: empty raster");
  Grid out(h, w);
  for (int r = 0; r < h; ++r) {
    const int sr = reflect_index(r0 + r, rows_);
    for (int c = 0; c < w; ++c) {
      const int sc = reflect_index(c0 + c, cols_);
      for (int ch = 0; ch < Channels; ++ch) out.at(r, c, ch) = at(sr, sc, ch);
    }
  }
  return out;
}

/// 8-bit RGB image.
using RgbImage = Grid<std::uint8_t, 3>;

/// Strictly binary mask; stored as 0/1 bytes.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int rows, int cols, bool fill = false) : grid_(rows, cols, fill ? 1 : 0) {}

  int rows() const { return grid_.rows(); }
  int cols() const { return grid_.cols(); }
  bool empty() const { return grid_.empty(); }
  std::size_t pixel_count() const { return grid_.pixel_count(); }

  bool test(int r, int c) const { return grid_.at(r, c) != 0; }
  void set(int r, int c, bool v = true) { grid_.at(r, c) = v ? 1 : 0; }

  std::span<const std::uint8_t> data() const { return grid_.data(); }

  std::size_t count() const;
  bool any() const { return count() > 0; }

  template <typename U, int C>
  bool same_shape(const Grid<U, C>& g) const { return grid_.same_shape(g); }
  bool same_shape(const BinaryMask& m) const { return grid_.same_shape(m.grid_); }

  BinaryMask crop_reflect(int r0, int c0, int h, int w) const;

  /// Build from bytes where any nonzero value counts as set.
  static BinaryMask from_bytes(int rows, int cols, std::span<const std::uint8_t> bytes);

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  Grid<std::uint8_t, 1> grid_;
};

/// Pixelwise OR; throws ShapeError on mismatch.
BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
/// Pixelwise AND; throws ShapeError on mismatch.
BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b);
/// Pixelwise a AND NOT b.
BinaryMask mask_difference(const BinaryMask& a, const BinaryMask& b);
/// |a ∩ b| without materializing the intersection.
std::size_t overlap_count(const BinaryMask& a, const BinaryMask& b);
bool is_subset(const BinaryMask& a, const BinaryMask& b);

void require_same_shape(int rows_a, int cols_a, int rows_b, int cols_b, const std::string& what);

}  // namespace hullscan
