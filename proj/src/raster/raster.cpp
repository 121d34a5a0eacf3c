#include "hullscan/raster/raster.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace hullscan {

void require_same_shape(int rows_a, int cols_a, int rows_b, int cols_b, const std::string& what) {
  if (rows_a != rows_b || cols_a != cols_b) {
    std::ostringstream os;
    os << what << ": shape mismatch " << rows_a << "x" << cols_a << " vs " << rows_b << "x"
       << cols_b;
    throw ShapeError(os.str());
  }
}

std::size_t BinaryMask::count() const {
  const auto d = grid_.data();
  return static_cast<std::size_t>(std::count(d.begin(), d.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::crop_reflect(int r0, int c0, int h, int w) const {
  BinaryMask out;
  out.grid_ = grid_.crop_reflect(r0, c0, h, w);
  return out;
}

BinaryMask BinaryMask::from_bytes(int rows, int cols, std::span<const std::uint8_t> bytes) {
  if (bytes.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("BinaryMask::from_bytes: byte count does not match shape");
  }
  BinaryMask m(rows, cols);
  auto dst = m.grid_.data();
  std::transform(bytes.begin(), bytes.end(), dst.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(v != 0); });
  return m;
}

namespace {

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, const char* what, Op op) {
  require_same_shape(a.rows(), a.cols(), b.rows(), b.cols(), what);
  BinaryMask out(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) out.set(r, c, op(a.test(r, c), b.test(r, c)));
  return out;
}

}  // namespace

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask_union", [](bool x, bool y) { return x || y; });
}

BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask_intersection", [](bool x, bool y) { return x && y; });
}

BinaryMask mask_difference(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask_difference", [](bool x, bool y) { return x && !y; });
}

std::size_t overlap_count(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a.rows(), a.cols(), b.rows(), b.cols(), "overlap_count");
  const auto da = a.data();
  const auto db = b.data();
  return std::inner_product(da.begin(), da.end(), db.begin(), std::size_t{0}, std::plus<>{},
                            [](std::uint8_t x, std::uint8_t y) -> std::size_t { return x & y; });
}

bool is_subset(const BinaryMask& a, const BinaryMask& b) {
  return overlap_count(a, b) == a.count();
}

}  // namespace hullscan
