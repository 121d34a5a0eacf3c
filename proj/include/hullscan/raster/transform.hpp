#pragma once

#include <stdexcept>

#include "hullscan/raster/maskset.hpp"
#include "hullscan/raster/raster.hpp"
#include "hullscan/raster/sections.hpp"

namespace hullscan {

inline constexpr int kFrameWidth = 640;
inline constexpr int kFrameHeight = 480;

class NoShipError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps between a source raster and the fixed-size ship frame cut out of it.
///
/// Coordinates are continuous (pixel corners at integers). A frame point
/// (row, col) corresponds to source point
/// (row0 + row * height / out_rows, col0 + col * width / out_cols).
struct CropTransform {
  int row0 = 0;
  int col0 = 0;
  int height = 0;
  int width = 0;
  int src_rows = 0;
  int src_cols = 0;
  int out_rows = kFrameHeight;
  int out_cols = kFrameWidth;

  double scale_rows() const { return static_cast<double>(out_rows) / height; }
  double scale_cols() const { return static_cast<double>(out_cols) / width; }

  struct Point {
    double row;
    double col;
  };
  Point to_source(Point frame) const;
  Point to_frame(Point source) const;

  friend bool operator==(const CropTransform&, const CropTransform&) = default;
};

/// Tight bounding box of a nonempty mask. Throws NoShipError when empty.
CropTransform ship_crop(const BinaryMask& ship_mask, int out_rows = kFrameHeight,
                        int out_cols = kFrameWidth);

/// Bilinear resize.
RgbImage resize_image(const RgbImage& img, int rows, int cols);
/// Nearest-neighbour resize.
BinaryMask resize_mask(const BinaryMask& mask, int rows, int cols);
SectionMap resize_sections(const SectionMap& map, int rows, int cols);

RgbImage crop_image(const RgbImage& img, const CropTransform& t);
BinaryMask crop_mask(const BinaryMask& mask, const CropTransform& t);
MaskSet crop_maskset(const MaskSet& masks, const CropTransform& t);
/// Boundaries are resampled at frame column centres (nearest source column).
BoundaryPair crop_boundaries(const BoundaryPair& b, const CropTransform& t);

/// Inverse of crop_mask: paste a frame-sized mask back into the source raster.
BinaryMask uncrop_mask(const BinaryMask& frame_mask, const CropTransform& t);
MaskSet uncrop_maskset(const MaskSet& frame_masks, const CropTransform& t);
SectionMap uncrop_sections(const SectionMap& frame_map, const CropTransform& t);

struct CroppedShip {
  RgbImage image;
  CropTransform transform;
};

/// Crop the ship's bounding box and resize it to the ship frame.
CroppedShip crop_resize_ship(const RgbImage& image, const BinaryMask& ship_mask,
                             int out_rows = kFrameHeight, int out_cols = kFrameWidth);

struct AugmentRanges {
  double max_rotation_deg = 8.0;
  /// Fraction of the corresponding dimension.
  double max_shift_frac = 0.05;
};

struct AugmentParams {
  double rotation_deg = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  bool channel_flip = false;
};

/// Throws std::invalid_argument when params fall outside `ranges` for the given size.
void validate(const AugmentParams& p, int rows, int cols, const AugmentRanges& ranges = {});

struct Augmented {
  RgbImage image;
  BoundaryPair boundaries;
};

/// Rotate about the image centre, then shift by (dx, dy); optionally swap R and B.
/// Boundary curves are mapped through the same motion and resampled per column;
/// columns that the moved curve does not cover (or covers outside the frame)
/// become invalid.
Augmented augment(const RgbImage& image, const BoundaryPair& b, const AugmentParams& p,
                  const AugmentRanges& ranges = {});
BinaryMask augment_mask(const BinaryMask& mask, const AugmentParams& p);

RgbImage flip_channels(const RgbImage& image);

}  // namespace hullscan
