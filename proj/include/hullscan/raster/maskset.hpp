#pragma once

#include <array>
#include <string_view>

#include "hullscan/raster/raster.hpp"

namespace hullscan {

/// Defect classes in segmentation channel order.
enum class Defect : int { corrosion = 0, delamination = 1, fouling = 2 };

inline constexpr std::array<Defect, 3> kDefects = {Defect::corrosion, Defect::delamination,
                                                   Defect::fouling};

std::string_view defect_name(Defect d);

/// Classifier output order: (corrosion, fouling, delamination).
inline constexpr std::array<Defect, 3> kClassifierOrder = {Defect::corrosion, Defect::fouling,
                                                           Defect::delamination};

/// Per-class defect masks aligned to one raster. Classes may overlap.
struct MaskSet {
  std::array<BinaryMask, 3> masks;

  MaskSet() = default;
  MaskSet(int rows, int cols)
      : masks{BinaryMask(rows, cols), BinaryMask(rows, cols), BinaryMask(rows, cols)} {}

  BinaryMask& operator[](Defect d) { return masks[static_cast<int>(d)]; }
  const BinaryMask& operator[](Defect d) const { return masks[static_cast<int>(d)]; }

  int rows() const { return masks[0].rows(); }
  int cols() const { return masks[0].cols(); }

  /// Union of all classes.
  BinaryMask any() const;
  MaskSet crop_reflect(int r0, int c0, int h, int w) const;

  friend bool operator==(const MaskSet&, const MaskSet&) = default;
};

MaskSet maskset_union(const MaskSet& a, const MaskSet& b);
MaskSet maskset_intersection(const MaskSet& a, const MaskSet& b);
/// Restrict every class to `region`.
MaskSet maskset_restrict(const MaskSet& a, const BinaryMask& region);

}  // namespace hullscan
