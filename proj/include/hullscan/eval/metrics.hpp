#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hullscan/raster/coverage.hpp"
#include "hullscan/raster/maskset.hpp"
#include "hullscan/raster/sections.hpp"

namespace hullscan::eval {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp, tn += o.tn, fp += o.fp, fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Labels and predictions are 0/1. Throws on empty input, length mismatch or
/// non-binary values.
ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> preds);
/// Pixel-level confusion of a predicted mask against ground truth.
ConfusionMatrix confusion(const BinaryMask& pred, const BinaryMask& truth);

/// A metric whose denominator is zero is reported as nullopt ("undefined").
struct Metrics {
  std::optional<double> accuracy;
  std::optional<double> balanced_accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

Metrics metrics(const ConfusionMatrix& cm);

/// |pred ∩ truth| / |pred ∪ truth|; nullopt when the union is empty.
std::optional<double> iou(const BinaryMask& pred, const BinaryMask& truth);

struct IouSummary {
  std::vector<std::optional<double>> per_class;
  /// Mean over defined classes; nullopt if none is defined.
  std::optional<double> mean;
};

/// Classes TS, BT, VS.
IouSummary mean_iou(const SectionMap& pred, const SectionMap& truth);
/// Classes in Defect order.
IouSummary mean_iou(const MaskSet& pred, const MaskSet& truth);

/// Mean of the defined entries; nullopt if there are none.
std::optional<double> mean_defined(std::span<const std::optional<double>> values);

/// Section-wise mean coverage over the reports that contain each section.
struct CoverageTable {
  /// [section][defect]; nullopt when no report contains the section.
  std::array<std::array<std::optional<double>, 3>, 3> mean{};
  /// Number of reports contributing to each cell.
  std::array<std::array<std::size_t, 3>, 3> count{};
};

/// Throws std::invalid_argument for an empty list. Reports carrying a
/// diagnostic (no ship found) contribute nothing.
CoverageTable aggregate_reports(std::span<const DefectReport> reports);

}  // namespace hullscan::eval
