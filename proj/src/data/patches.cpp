#include "hullscan/data/patches.hpp"

#include <stdexcept>

namespace hullscan::data {

std::vector<std::array<int, 2>> tile_origins(int rows, int cols, int size) {
  if (size <= 0) throw std::invalid_argument("tile size must be positive");
  std::vector<std::array<int, 2>> origins;
  for (int r = 0; r < rows; r += size)
    for (int c = 0; c < cols; c += size) origins.push_back({r, c});
  if (origins.empty()) origins.push_back({0, 0});
  return origins;
}

std::vector<Patch> slice_seg_patches(const ImageRecord& record, int size, double min_defect_frac) {
  if (!record.defect_masks) {
    throw std::invalid_argument("slice_seg_patches: record " + record.id + " has no defect masks");
  }
  const MaskSet& masks = *record.defect_masks;
  const BinaryMask any = masks.any();
  const double area = static_cast<double>(size) * size;
  std::vector<Patch> patches;
  for (const auto& [r0, c0] : tile_origins(record.pixels.rows(), record.pixels.cols(), size)) {
    const BinaryMask tile_any = any.crop_reflect(r0, c0, size, size);
    const double frac = static_cast<double>(tile_any.count()) / area;
    if (frac < min_defect_frac) continue;
    Patch p;
    p.pixels = record.pixels.crop_reflect(r0, c0, size, size);
    p.masks = masks.crop_reflect(r0, c0, size, size);
    for (int k = 0; k < 3; ++k) p.labels[k] = (*p.masks)[kClassifierOrder[k]].any();
    p.roi_ratio = frac;
    p.row = r0;
    p.col = c0;
    p.source_id = record.id;
    patches.push_back(std::move(p));
  }
  return patches;
}

std::vector<Patch> select_cls_patches(const ImageRecord& record, const BinaryMask& roi_mask,
                                      int size, double roi_thresh) {
  require_same_shape(roi_mask.rows(), roi_mask.cols(), record.pixels.rows(), record.pixels.cols(),
                     "select_cls_patches");
  const double area = static_cast<double>(size) * size;
  std::vector<Patch> patches;
  for (const auto& [r0, c0] : tile_origins(record.pixels.rows(), record.pixels.cols(), size)) {
    const BinaryMask roi = roi_mask.crop_reflect(r0, c0, size, size);
    const double ratio = static_cast<double>(roi.count()) / area;
    if (!(ratio > roi_thresh)) continue;
    Patch p;
    p.pixels = record.pixels.crop_reflect(r0, c0, size, size);
    p.roi_ratio = ratio;
    p.row = r0;
    p.col = c0;
    p.source_id = record.id;
    if (record.defect_masks) {
      for (int k = 0; k < 3; ++k) {
        const BinaryMask truth =
            (*record.defect_masks)[kClassifierOrder[k]].crop_reflect(r0, c0, size, size);
        p.overlap[k] = overlap_count(truth, roi);
        p.labels[k] = p.overlap[k] >= 1 ? 1 : 0;
      }
    }
    patches.push_back(std::move(p));
  }
  return patches;
}

}  // namespace hullscan::data
