#include "hullscan/raster/sections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hullscan {

std::string_view section_name(Section s) {
  switch (s) {
    case Section::background: return "background";
    case Section::ts: return "TS";
    case Section::bt: return "BT";
    case Section::vs: return "VS";
  }
  return "unknown";
}

bool BoundaryPair::present(int i) const {
  return std::any_of(valid[i].begin(), valid[i].end(), [](std::uint8_t v) { return v != 0; });
}

void validate(const BoundaryPair& b) {
  const auto w = b.y[0].size();
  if (b.y[1].size() != w || b.valid[0].size() != w || b.valid[1].size() != w) {
    throw std::invalid_argument("BoundaryPair: rows have different widths");
  }
  for (int i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      if (!b.valid[i][j]) continue;
      const double v = b.y[i][j];
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw std::invalid_argument("BoundaryPair: boundary " + std::to_string(i) +
                                    " out of [0,1] at column " + std::to_string(j));
      }
    }
  }
  for (std::size_t j = 0; j < w; ++j) {
    if (b.valid[0][j] && b.valid[1][j] && b.y[0][j] > b.y[1][j]) {
      throw std::invalid_argument("BoundaryPair: TS/BT below BT/VS at column " +
                                  std::to_string(j));
    }
  }
}

namespace {

// Fill invalid columns with the value of the nearest valid column (left wins ties).
std::vector<double> fill_nearest(const std::vector<double>& y, const std::vector<std::uint8_t>& valid) {
  const int w = static_cast<int>(y.size());
  constexpr int kNone = std::numeric_limits<int>::max() / 2;
  std::vector<int> left(w, -kNone), right(w, kNone);
  int last = -kNone;
  for (int j = 0; j < w; ++j) {
    if (valid[j]) last = j;
    left[j] = last;
  }
  last = kNone;
  for (int j = w - 1; j >= 0; --j) {
    if (valid[j]) last = j;
    right[j] = last;
  }
  std::vector<double> out(w);
  for (int j = 0; j < w; ++j) {
    const int dl = j - left[j];
    const int dr = right[j] - j;
    out[j] = y[dl <= dr ? left[j] : right[j]];
  }
  return out;
}

}  // namespace

SectionMap boundaries_to_section_map(const BinaryMask& ship_mask, const BoundaryPair& b,
                                     const SectionMapOptions& options) {
  const int rows = ship_mask.rows();
  const int cols = ship_mask.cols();
  if (b.width() != cols) {
    throw ShapeError("boundaries_to_section_map: boundary width " + std::to_string(b.width()) +
                     " != mask width " + std::to_string(cols));
  }
  const bool has_upper = b.present(0);
  const bool has_lower = b.present(1);
  std::vector<double> upper = has_upper ? fill_nearest(b.y[0], b.valid[0]) : std::vector<double>{};
  std::vector<double> lower = has_lower ? fill_nearest(b.y[1], b.valid[1]) : std::vector<double>{};
  if (has_upper && has_lower) {
    for (int j = 0; j < cols; ++j) lower[j] = std::max(upper[j], lower[j]);
  }

  SectionMap map(rows, cols, Section::background);
  for (int r = 0; r < rows; ++r) {
    const double yc = (r + 0.5) / rows;
    for (int c = 0; c < cols; ++c) {
      if (!ship_mask.test(r, c)) continue;
      Section s = options.zero_boundary_section;
      if (has_upper && has_lower) {
        s = yc < upper[c] ? Section::ts : (yc < lower[c] ? Section::bt : Section::vs);
      } else if (has_upper) {
        s = yc < upper[c] ? Section::ts : Section::bt;
      } else if (has_lower) {
        s = yc < lower[c] ? Section::bt : Section::vs;
      }
      map.at(r, c) = s;
    }
  }
  return map;
}

BinaryMask section_mask(const SectionMap& map, Section s) {
  BinaryMask m(map.rows(), map.cols());
  for (int r = 0; r < map.rows(); ++r)
    for (int c = 0; c < map.cols(); ++c) m.set(r, c, map.at(r, c) == s);
  return m;
}

std::array<std::size_t, 3> section_areas(const SectionMap& map) {
  std::array<std::size_t, 3> areas{};
  for (Section s : map.data())
    if (s != Section::background) ++areas[section_index(s)];
  return areas;
}

}  // namespace hullscan
