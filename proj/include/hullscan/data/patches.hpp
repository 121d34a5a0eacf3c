#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hullscan/data/record.hpp"

namespace hullscan::data {

/// A square crop of a record.
struct Patch {
  RgbImage pixels;
  /// Multi-label ground truth in classifier order (corrosion, fouling, delamination).
  std::array<std::uint8_t, 3> labels{};
  /// Ground-truth pixels of each class inside the tile's RoI (classifier order).
  std::array<std::size_t, 3> overlap{};
  /// RoI pixels (or defect pixels, for segmentation patches) over size^2.
  double roi_ratio = 0.0;
  int row = 0;  ///< origin in the source image
  int col = 0;
  std::string source_id;
  /// Cropped label masks; set for segmentation patches.
  std::optional<MaskSet> masks;
};

/// Origins of the non-overlapping size x size tiles covering rows x cols.
/// Edge tiles extend past the image and are filled by reflection.
std::vector<std::array<int, 2>> tile_origins(int rows, int cols, int size);

/// Segmentation training tiles. Tiles whose union-of-defects fraction is
/// below `min_defect_frac` are dropped; a fraction equal to it is kept.
std::vector<Patch> slice_seg_patches(const ImageRecord& record, int size = 224,
                                     double min_defect_frac = 0.01);

/// Classification tiles whose RoI ratio is strictly above `roi_thresh`.
/// l_i = 1 iff the ground-truth mask of class i shares at least one pixel
/// with the tile's RoI. Records without defect masks get all-zero labels.
std::vector<Patch> select_cls_patches(const ImageRecord& record, const BinaryMask& roi_mask,
                                      int size = 64, double roi_thresh = 0.1);

}  // namespace hullscan::data
