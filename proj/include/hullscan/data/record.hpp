#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "hullscan/raster/maskset.hpp"
#include "hullscan/raster/raster.hpp"
#include "hullscan/raster/sections.hpp"

namespace hullscan::data {

enum class Split { train, val, test };

std::string_view split_name(Split s);
/// Throws std::invalid_argument for anything other than train/val/test.
Split parse_split(std::string_view name);

/// An RGB image plus whatever annotations exist for it.
struct ImageRecord {
  std::string id;
  RgbImage pixels;
  std::optional<BinaryMask> ship_mask;
  std::optional<BoundaryPair> boundaries;
  std::optional<MaskSet> defect_masks;
  Split split = Split::train;
};

/// Checks shared shapes and that defect pixels lie on the ship.
void validate(const ImageRecord& record);

}  // namespace hullscan::data
