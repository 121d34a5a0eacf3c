#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <json.hpp>

#include "hullscan/eval/metrics.hpp"
#include "hullscan/raster/coverage.hpp"
#include "hullscan/raster/raster.hpp"

namespace hullscan::eval {

/// Column order of the coverage CSVs: defect-major, then TS/BT/VS.
std::string coverage_csv_header(const std::string& first_column = "image_id");

nlohmann::json report_to_json(const DefectReport& report);
DefectReport report_from_json(const nlohmann::json& j);
/// One CSV row; absent sections leave their cells empty.
std::string report_csv_row(const DefectReport& report);

nlohmann::json table_to_json(const CoverageTable& table);
/// Two rows: "mean" and "images".
std::string table_to_csv(const CoverageTable& table);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Corrosion red, delamination yellow, fouling green, alpha-blended.
RgbImage render_defect_overlay(const RgbImage& image, const MaskSet& defects, double alpha = 0.5);
/// TS red, BT yellow, VS green, alpha-blended.
RgbImage render_section_overlay(const RgbImage& image, const SectionMap& sections,
                                double alpha = 0.4);

}  // namespace hullscan::eval
