#include "hullscan/data/dataset_io.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "../raster/cv_interop.hpp"

namespace hullscan::data {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 3> kDefectFiles = {"corrosion.png", "delamination.png",
                                                     "fouling.png"};
constexpr std::array<Split, 3> kSplits = {Split::train, Split::val, Split::test};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DatasetError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string rel(const fs::path& p, const fs::path& root) {
  return fs::relative(p, root).generic_string();
}

}  // namespace

std::vector<const ManifestEntry*> Manifest::split(Split s) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries)
    if (e.split == s) out.push_back(&e);
  return out;
}

RgbImage read_image(const fs::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw DatasetError("cannot read image " + path.string());
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return detail::to_rgb(rgb);
}

void write_image(const fs::path& path, const RgbImage& image) {
  cv::Mat bgr;
  cv::cvtColor(detail::view(image), bgr, cv::COLOR_RGB2BGR);
  if (!cv::imwrite(path.string(), bgr)) throw DatasetError("cannot write image " + path.string());
}

BinaryMask read_mask(const fs::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (m.empty()) throw DatasetError("cannot read mask " + path.string());
  return detail::to_mask(m);
}

void write_mask(const fs::path& path, const BinaryMask& mask) {
  cv::Mat m = detail::to_mat(mask) * 255;
  if (!cv::imwrite(path.string(), m)) throw DatasetError("cannot write mask " + path.string());
}

json boundaries_to_json(const BoundaryPair& b) {
  json j;
  j["width"] = b.width();
  j["normalized"] = true;
  j["y"] = json::array({b.y[0], b.y[1]});
  j["valid"] = json::array({b.valid[0], b.valid[1]});
  return j;
}

BoundaryPair boundaries_from_json(const json& j) {
  try {
    const int w = j.at("width").get<int>();
    BoundaryPair b(w);
    for (int i = 0; i < 2; ++i) {
      b.y[i] = j.at("y").at(i).get<std::vector<double>>();
      b.valid[i] = j.at("valid").at(i).get<std::vector<std::uint8_t>>();
      for (auto& v : b.valid[i]) v = v != 0;
    }
    validate(b);
    if (b.width() != w) throw DatasetError("boundary width field disagrees with arrays");
    return b;
  } catch (const json::exception& e) {
    throw DatasetError(std::string("malformed boundaries: ") + e.what());
  }
}

void write_boundaries(const fs::path& path, const BoundaryPair& b) {
  write_json(path, boundaries_to_json(b));
}

BoundaryPair read_boundaries(const fs::path& path) { return boundaries_from_json(read_json(path)); }

void write_record(const fs::path& root, const ImageRecord& record, const RecordMeta& meta) {
  validate(record);
  const fs::path dir = root / split_name(record.split) / record.id;
  fs::create_directories(dir);
  write_image(dir / "image.png", record.pixels);
  if (record.ship_mask) write_mask(dir / "ship.png", *record.ship_mask);
  if (record.defect_masks) {
    for (Defect d : kDefects)
      write_mask(dir / kDefectFiles[static_cast<int>(d)], (*record.defect_masks)[d]);
  }
  if (record.boundaries) write_boundaries(dir / "boundaries.json", *record.boundaries);
  json m;
  m["id"] = record.id;
  m["split"] = split_name(record.split);
  m["label_source"] = meta.label_source;
  if (meta.seed) m["seed"] = *meta.seed;
  write_json(dir / "meta.json", m);
}

Manifest build_manifest(const fs::path& root) {
  if (!fs::is_directory(root)) throw DatasetError("not a directory: " + root.string());
  Manifest manifest;
  std::vector<std::string> missing;
  std::map<std::string, int> seen;
  for (Split split : kSplits) {
    const fs::path split_dir = root / split_name(split);
    if (!fs::is_directory(split_dir)) continue;
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(split_dir))
      if (e.is_directory()) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
      ManifestEntry entry;
      entry.id = dir.filename().string();
      entry.split = split;
      ++seen[entry.id];
      if (!fs::exists(dir / "image.png")) {
        missing.push_back(entry.id);
        continue;
      }
      entry.image = rel(dir / "image.png", root);
      if (fs::exists(dir / "ship.png")) entry.ship = rel(dir / "ship.png", root);
      if (fs::exists(dir / "boundaries.json")) entry.boundaries = rel(dir / "boundaries.json", root);
      if (fs::exists(dir / "meta.json")) entry.meta = rel(dir / "meta.json", root);
      int present = 0;
      std::array<std::string, 3> files;
      for (int k = 0; k < 3; ++k) {
        if (fs::exists(dir / kDefectFiles[k])) ++present;
        files[k] = rel(dir / kDefectFiles[k], root);
      }
      if (present == 3) {
        entry.defects = files;
      } else if (present != 0) {
        missing.push_back(entry.id);
        continue;
      }
      manifest.entries.push_back(std::move(entry));
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing annotation files for records:";
    for (const auto& id : missing) msg += " " + id;
    throw DatasetError(msg, missing);
  }
  std::vector<std::string> dups;
  for (const auto& [id, n] : seen)
    if (n > 1) dups.push_back(id);
  if (!dups.empty()) {
    std::string msg = "duplicate record ids:";
    for (const auto& id : dups) msg += " " + id;
    throw DatasetError(msg, dups);
  }
  return manifest;
}

void write_manifest(const fs::path& root, const Manifest& manifest) {
  json j;
  j["format_version"] = manifest.format_version;
  j["records"] = json::array();
  for (const auto& e : manifest.entries) {
    json r;
    r["id"] = e.id;
    r["split"] = split_name(e.split);
    r["image"] = e.image;
    r["ship"] = e.ship ? json(*e.ship) : json(nullptr);
    r["boundaries"] = e.boundaries ? json(*e.boundaries) : json(nullptr);
    r["meta"] = e.meta ? json(*e.meta) : json(nullptr);
    if (e.defects) {
      r["defects"] = {{"corrosion", (*e.defects)[0]},
                      {"delamination", (*e.defects)[1]},
                      {"fouling", (*e.defects)[2]}};
    } else {
      r["defects"] = nullptr;
    }
    r["has_ship"] = e.has_ship();
    r["has_boundaries"] = e.has_boundaries();
    r["has_defects"] = e.has_defects();
    j["records"].push_back(std::move(r));
  }
  write_json(root / "manifest.json", j);
}

Manifest read_manifest(const fs::path& root) {
  const json j = read_json(root / "manifest.json");
  Manifest m;
  try {
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kManifestFormatVersion) {
      throw DatasetError("unsupported manifest format_version " + std::to_string(m.format_version));
    }
    auto opt = [](const json& r, const char* key) -> std::optional<std::string> {
      if (!r.contains(key) || r.at(key).is_null()) return std::nullopt;
      return r.at(key).get<std::string>();
    };
    std::vector<std::string> missing;
    for (const auto& r : j.at("records")) {
      ManifestEntry e;
      e.id = r.at("id").get<std::string>();
      e.split = parse_split(r.at("split").get<std::string>());
      e.image = r.at("image").get<std::string>();
      e.ship = opt(r, "ship");
      e.boundaries = opt(r, "boundaries");
      e.meta = opt(r, "meta");
      if (r.contains("defects") && !r.at("defects").is_null()) {
        const auto& d = r.at("defects");
        e.defects = std::array<std::string, 3>{d.at("corrosion").get<std::string>(),
                                               d.at("delamination").get<std::string>(),
                                               d.at("fouling").get<std::string>()};
      }
      bool ok = fs::exists(root / e.image);
      for (const auto& p : {e.ship, e.boundaries, e.meta})
        if (p) ok = ok && fs::exists(root / *p);
      if (e.defects)
        for (const auto& p : *e.defects) ok = ok && fs::exists(root / p);
      if (!ok) missing.push_back(e.id);
      m.entries.push_back(std::move(e));
    }
    if (!missing.empty()) {
      std::string msg = "manifest references missing files for records:";
      for (const auto& id : missing) msg += " " + id;
      throw DatasetError(msg, missing);
    }
  } catch (const json::exception& e) {
    throw DatasetError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

ImageRecord load_record(const fs::path& root, const ManifestEntry& entry) {
  ImageRecord r;
  r.id = entry.id;
  r.split = entry.split;
  r.pixels = read_image(root / entry.image);
  if (entry.ship) r.ship_mask = read_mask(root / *entry.ship);
  if (entry.boundaries) r.boundaries = read_boundaries(root / *entry.boundaries);
  if (entry.defects) {
    MaskSet ms;
    for (int k = 0; k < 3; ++k) ms.masks[k] = read_mask(root / (*entry.defects)[k]);
    r.defect_masks = std::move(ms);
  }
  validate(r);
  return r;
}

RecordMeta load_meta(const fs::path& root, const ManifestEntry& entry) {
  RecordMeta meta;
  if (!entry.meta) return meta;
  const json j = read_json(root / *entry.meta);
  meta.label_source = j.value("label_source", std::string("human"));
  if (j.contains("seed")) meta.seed = j.at("seed").get<std::uint64_t>();
  return meta;
}

// Section maps: paletted PNG through libpng (OpenCV cannot write palettes).
namespace {

constexpr std::array<png_color, 4> kSectionPalette = {
    png_color{0, 0, 0}, png_color{255, 0, 0}, png_color{255, 255, 0}, png_color{0, 255, 0}};

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

}  // namespace

void write_section_map(const fs::path& path, const SectionMap& map) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw DatasetError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DatasetError("libpng failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, map.cols(), map.rows(), 8, PNG_COLOR_TYPE_PALETTE, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_PLTE(png, info, kSectionPalette.data(), static_cast<int>(kSectionPalette.size()));
  png_write_info(png, info);
  std::vector<png_byte> row(map.cols());
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) row[c] = static_cast<png_byte>(map.at(r, c));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

SectionMap read_section_map(const fs::path& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw DatasetError("cannot read " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DatasetError("libpng failed reading " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const int cols = static_cast<int>(png_get_image_width(png, info));
  const int rows = static_cast<int>(png_get_image_height(png, info));
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_PALETTE ||
      png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DatasetError("section map is not an 8-bit paletted PNG: " + path.string());
  }
  SectionMap map(rows, cols);
  std::vector<png_byte> row(cols);
  for (int r = 0; r < rows; ++r) {
    png_read_row(png, row.data(), nullptr);
    for (int c = 0; c < cols; ++c) {
      if (row[c] > 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DatasetError("section map index out of range in " + path.string());
      }
      map.at(r, c) = static_cast<Section>(row[c]);
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return map;
}

}  // namespace hullscan::data
