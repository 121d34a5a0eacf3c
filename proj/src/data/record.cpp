#include "hullscan/data/record.hpp"

#include <stdexcept>
#include <string>

namespace hullscan::data {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw std::invalid_argument("unknown split '" + std::string(name) + "'");
}

void validate(const ImageRecord& record) {
  const int rows = record.pixels.rows();
  const int cols = record.pixels.cols();
  const std::string who = "record " + record.id;
  if (record.ship_mask) require_same_shape(record.ship_mask->rows(), record.ship_mask->cols(), rows, cols, who + " ship mask");
  if (record.boundaries) {
    if (record.boundaries->width() != cols) throw ShapeError(who + ": boundary width != image width");
    validate(*record.boundaries);
  }
  if (record.defect_masks) {
    for (Defect d : kDefects) {
      const auto& m = (*record.defect_masks)[d];
      require_same_shape(m.rows(), m.cols(), rows, cols, who + " " + std::string(defect_name(d)));
      if (record.ship_mask && !is_subset(m, *record.ship_mask)) {
        throw std::invalid_argument(who + ": " + std::string(defect_name(d)) +
                                    " pixels outside the ship mask");
      }
    }
  }
}

}  // namespace hullscan::data
