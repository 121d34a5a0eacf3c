#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "hullscan/raster/maskset.hpp"
#include "hullscan/raster/sections.hpp"

namespace hullscan {

struct SectionCoverage {
  bool present = false;
  std::size_t area = 0;
  /// Indexed by Defect. Meaningless when !present.
  std::array<double, 3> percent{};
};

/// Per-section, per-defect coverage of one image.
struct DefectReport {
  std::string image_id;
  /// Indexed by section_index (TS, BT, VS).
  std::array<SectionCoverage, 3> sections;
  /// Non-empty when the pipeline could not produce a report (e.g. no ship).
  std::string diagnostic;

  const SectionCoverage& operator[](Section s) const { return sections[section_index(s)]; }
  SectionCoverage& operator[](Section s) { return sections[section_index(s)]; }
  double percent(Section s, Defect d) const {
    return (*this)[s].percent[static_cast<int>(d)];
  }
};

/// 100 * |defect ∩ section| / |section| for every section with nonzero area.
DefectReport coverage(const SectionMap& sections, const MaskSet& defects,
                      std::string image_id = {});

/// Zero the fouling mask on TS pixels.
MaskSet suppress_ts_fouling(const SectionMap& sections, const MaskSet& defects);

}  // namespace hullscan
