#include "hullscan/eval/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace hullscan::eval {

using nlohmann::json;

namespace {

using Rgb = std::array<double, 3>;
constexpr std::array<Rgb, 3> kDefectColors = {Rgb{255, 0, 0}, Rgb{255, 255, 0}, Rgb{0, 255, 0}};
constexpr std::array<Rgb, 3> kSectionColors = {Rgb{255, 0, 0}, Rgb{255, 255, 0}, Rgb{0, 255, 0}};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

void blend(RgbImage& img, int r, int c, const Rgb& color, double alpha) {
  for (int k = 0; k < 3; ++k) {
    const double v = (1.0 - alpha) * img.at(r, c, k) + alpha * color[k];
    img.at(r, c, k) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
  }
}

}  // namespace

std::string coverage_csv_header(const std::string& first_column) {
  std::string h = first_column;
  for (Defect d : kDefects)
    for (Section s : kSections) h += "," + std::string(defect_name(d)) + "_" + std::string(section_name(s));
  return h;
}

json report_to_json(const DefectReport& report) {
  json j;
  j["image_id"] = report.image_id;
  if (!report.diagnostic.empty()) j["diagnostic"] = report.diagnostic;
  json secs = json::object();
  for (Section s : kSections) {
    const auto& sc = report[s];
    json e;
    e["present"] = sc.present;
    e["area"] = sc.area;
    if (sc.present) {
      for (Defect d : kDefects) e[std::string(defect_name(d))] = sc.percent[static_cast<int>(d)];
    }
    secs[std::string(section_name(s))] = e;
  }
  j["sections"] = secs;
  return j;
}

DefectReport report_from_json(const json& j) {
  DefectReport r;
  try {
    r.image_id = j.at("image_id").get<std::string>();
    r.diagnostic = j.value("diagnostic", std::string());
    for (Section s : kSections) {
      const auto& e = j.at("sections").at(std::string(section_name(s)));
      auto& sc = r[s];
      sc.present = e.at("present").get<bool>();
      sc.area = e.at("area").get<std::size_t>();
      if (sc.present) {
        for (Defect d : kDefects) sc.percent[static_cast<int>(d)] = e.at(std::string(defect_name(d))).get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string report_csv_row(const DefectReport& report) {
  std::string row = report.image_id;
  for (Defect d : kDefects) {
    for (Section s : kSections) {
      row += ",";
      if (report[s].present) row += fmt(report.percent(s, d));
    }
  }
  return row;
}

json table_to_json(const CoverageTable& table) {
  json j = json::object();
  for (Defect d : kDefects) {
    json per = json::object();
    for (Section s : kSections) {
      const int si = section_index(s), di = static_cast<int>(d);
      json cell;
      cell["mean"] = table.mean[si][di] ? json(*table.mean[si][di]) : json(nullptr);
      cell["images"] = table.count[si][di];
      per[std::string(section_name(s))] = cell;
    }
    j[std::string(defect_name(d))] = per;
  }
  return j;
}

std::string table_to_csv(const CoverageTable& table) {
  std::string mean_row = "mean", count_row = "images";
  for (Defect d : kDefects) {
    for (Section s : kSections) {
      const int si = section_index(s), di = static_cast<int>(d);
      mean_row += ",";
      if (table.mean[si][di]) mean_row += fmt(*table.mean[si][di]);
      count_row += "," + std::to_string(table.count[si][di]);
    }
  }
  return coverage_csv_header("row") + "\n" + mean_row + "\n" + count_row + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

RgbImage render_defect_overlay(const RgbImage& image, const MaskSet& defects, double alpha) {
  require_same_shape(image.rows(), image.cols(), defects.rows(), defects.cols(), "render_defect_overlay");
  RgbImage out = image;
  for (int r = 0; r < out.rows(); ++r) {
    for (int c = 0; c < out.cols(); ++c) {
      Rgb color{0, 0, 0};
      int n = 0;
      for (Defect d : kDefects) {
        if (!defects[d].test(r, c)) continue;
        for (int k = 0; k < 3; ++k) color[k] += kDefectColors[static_cast<int>(d)][k];
        ++n;
      }
      if (n == 0) continue;
      for (double& v : color) v /= n;
      blend(out, r, c, color, alpha);
    }
  }
  return out;
}

RgbImage render_section_overlay(const RgbImage& image, const SectionMap& sections, double alpha) {
  require_same_shape(image.rows(), image.cols(), sections.rows(), sections.cols(), "render_section_overlay");
  RgbImage out = image;
  for (int r = 0; r < out.rows(); ++r) {
    for (int c = 0; c < out.cols(); ++c) {
      const Section s = sections.at(r, c);
      if (s != Section::background) blend(out, r, c, kSectionColors[section_index(s)], alpha);
    }
  }
  return out;
}

}  // namespace hullscan::eval
