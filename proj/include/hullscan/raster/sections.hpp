#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "hullscan/raster/raster.hpp"

namespace hullscan {

enum class Section : std::uint8_t { background = 0, ts = 1, bt = 2, vs = 3 };

inline constexpr std::array<Section, 3> kSections = {Section::ts, Section::bt, Section::vs};

std::string_view section_name(Section s);
/// 0 for TS, 1 for BT, 2 for VS.
inline int section_index(Section s) { return static_cast<int>(s) - 1; }

using SectionMap = Grid<Section, 1>;

/// Two per-column boundary curves: row 0 is TS/BT, row 1 is BT/VS.
///
/// Heights are normalized to [0, 1] by the raster height, measured from the
/// top edge. `valid[i][j]` is the range mask: zero where boundary i is not
/// annotated (or not predicted) at column j.
struct BoundaryPair {
  std::array<std::vector<double>, 2> y;
  std::array<std::vector<std::uint8_t>, 2> valid;

  BoundaryPair() = default;
  explicit BoundaryPair(int width)
      : y{std::vector<double>(width, 0.0), std::vector<double>(width, 0.0)},
        valid{std::vector<std::uint8_t>(width, 0), std::vector<std::uint8_t>(width, 0)} {}

  int width() const { return static_cast<int>(y[0].size()); }
  bool is_valid(int i, int j) const { return valid[i][j] != 0; }
  /// Whether boundary i is valid in at least one column.
  bool present(int i) const;

  friend bool operator==(const BoundaryPair&, const BoundaryPair&) = default;
};

/// Throws std::invalid_argument when shapes disagree, a valid value is outside
/// [0, 1], or TS/BT lies below BT/VS in a column where both are valid.
void validate(const BoundaryPair& b);

struct SectionMapOptions {
  /// Label used when neither boundary exists anywhere.
  Section zero_boundary_section = Section::vs;
};

/// Assign ship pixels to TS/BT/VS column by column.
///
/// Invalid columns of an existing boundary take the value of the nearest valid
/// column. A missing TS/BT boundary merges TS into BT; a missing BT/VS boundary
/// merges VS into BT. Where BT/VS lies above TS/BT it is clamped to TS/BT.
SectionMap boundaries_to_section_map(const BinaryMask& ship_mask, const BoundaryPair& b,
                                     const SectionMapOptions& options = {});

BinaryMask section_mask(const SectionMap& map, Section s);
std::array<std::size_t, 3> section_areas(const SectionMap& map);

}  // namespace hullscan
