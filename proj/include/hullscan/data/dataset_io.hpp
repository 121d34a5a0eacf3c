#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hullscan/data/record.hpp"

namespace hullscan::data {

namespace fs = std::filesystem;

inline constexpr int kManifestFormatVersion = 1;

/// Raised when an on-disk dataset does not follow the documented layout.
class DatasetError : public std::runtime_error {
 public:
  DatasetError(const std::string& what, std::vector<std::string> ids = {})
      : std::runtime_error(what), ids_(std::move(ids)) {}
  const std::vector<std::string>& record_ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
};

/// Paths are relative to the dataset root.
struct ManifestEntry {
  std::string id;
  Split split = Split::train;
  std::string image;
  std::optional<std::string> ship;
  std::optional<std::string> boundaries;
  /// corrosion, delamination, fouling (Defect order); all or none.
  std::optional<std::array<std::string, 3>> defects;
  std::optional<std::string> meta;

  bool has_ship() const { return ship.has_value(); }
  bool has_boundaries() const { return boundaries.has_value(); }
  bool has_defects() const { return defects.has_value(); }
};

struct Manifest {
  int format_version = kManifestFormatVersion;
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> split(Split s) const;
};

/// Per-record metadata stored in meta.json.
struct RecordMeta {
  std::string label_source = "human";  ///< human | pseudo | fused
  std::optional<std::uint64_t> seed;
};

/// Scan <root>/<split>/<id>/ directories. Throws DatasetError naming every
/// record with a missing image or a partial set of defect masks.
Manifest build_manifest(const fs::path& root);

void write_manifest(const fs::path& root, const Manifest& manifest);
Manifest read_manifest(const fs::path& root);

/// Write a record into <root>/<split>/<id>/ using the documented file names.
void write_record(const fs::path& root, const ImageRecord& record, const RecordMeta& meta = {});
ImageRecord load_record(const fs::path& root, const ManifestEntry& entry);
RecordMeta load_meta(const fs::path& root, const ManifestEntry& entry);

RgbImage read_image(const fs::path& path);
void write_image(const fs::path& path, const RgbImage& image);
/// 8-bit PNG with values 0/255.
BinaryMask read_mask(const fs::path& path);
void write_mask(const fs::path& path, const BinaryMask& mask);

nlohmann::json boundaries_to_json(const BoundaryPair& b);
BoundaryPair boundaries_from_json(const nlohmann::json& j);
void write_boundaries(const fs::path& path, const BoundaryPair& b);
BoundaryPair read_boundaries(const fs::path& path);

/// Paletted PNG: 0 background (black), 1 TS (red), 2 BT (yellow), 3 VS (green).
void write_section_map(const fs::path& path, const SectionMap& map);
SectionMap read_section_map(const fs::path& path);

}  // namespace hullscan::data
