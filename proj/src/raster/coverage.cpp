#include "hullscan/raster/coverage.hpp"

namespace hullscan {

DefectReport coverage(const SectionMap& sections, const MaskSet& defects, std::string image_id) {
  for (Defect d : kDefects) {
    require_same_shape(sections.rows(), sections.cols(), defects[d].rows(), defects[d].cols(),
                       "coverage");
  }
  DefectReport report;
  report.image_id = std::move(image_id);
  std::array<std::array<std::size_t, 3>, 3> hits{};
  for (int r = 0; r < sections.rows(); ++r) {
    for (int c = 0; c < sections.cols(); ++c) {
      const Section s = sections.at(r, c);
      if (s == Section::background) continue;
      const int si = section_index(s);
      ++report.sections[si].area;
      for (Defect d : kDefects)
        if (defects[d].test(r, c)) ++hits[si][static_cast<int>(d)];
    }
  }
  for (int si = 0; si < 3; ++si) {
    auto& sc = report.sections[si];
    sc.present = sc.area > 0;
    if (!sc.present) continue;
    for (int d = 0; d < 3; ++d)
      sc.percent[d] = 100.0 * static_cast<double>(hits[si][d]) / static_cast<double>(sc.area);
  }
  return report;
}

MaskSet suppress_ts_fouling(const SectionMap& sections, const MaskSet& defects) {
  require_same_shape(sections.rows(), sections.cols(), defects.rows(), defects.cols(),
                     "suppress_ts_fouling");
  MaskSet out = defects;
  BinaryMask& fouling = out[Defect::fouling];
  for (int r = 0; r < sections.rows(); ++r)
    for (int c = 0; c < sections.cols(); ++c)
      if (sections.at(r, c) == Section::ts) fouling.set(r, c, false);
  return out;
}

}  // namespace hullscan
