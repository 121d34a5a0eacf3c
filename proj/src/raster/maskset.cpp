#include "hullscan/raster/maskset.hpp"

namespace hullscan {

std::string_view defect_name(Defect d) {
  switch (d) {
    case Defect::corrosion: return "corrosion";
    case Defect::delamination: return "delamination";
    case Defect::fouling: return "fouling";
  }
  return "unknown";
}

BinaryMask MaskSet::any() const {
  return mask_union(mask_union(masks[0], masks[1]), masks[2]);
}

MaskSet MaskSet::crop_reflect(int r0, int c0, int h, int w) const {
  MaskSet out;
  for (int i = 0; i < 3; ++i) out.masks[i] = masks[i].crop_reflect(r0, c0, h, w);
  return out;
}

MaskSet maskset_union(const MaskSet& a, const MaskSet& b) {
  MaskSet out;
  for (int i = 0; i < 3; ++i) out.masks[i] = mask_union(a.masks[i], b.masks[i]);
  return out;
}

MaskSet maskset_intersection(const MaskSet& a, const MaskSet& b) {
  MaskSet out;
  for (int i = 0; i < 3; ++i) out.masks[i] = mask_intersection(a.masks[i], b.masks[i]);
  return out;
}

MaskSet maskset_restrict(const MaskSet& a, const BinaryMask& region) {
  MaskSet out;
  for (int i = 0; i < 3; ++i) out.masks[i] = mask_intersection(a.masks[i], region);
  return out;
}

}  // namespace hullscan
