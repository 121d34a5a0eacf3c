#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hullscan/data/record.hpp"
#include "hullscan/raster/maskset.hpp"
#include "hullscan/raster/sections.hpp"

namespace hullscan::data {

/// Raised by validate(SceneSpec); `field()` names the offending parameter.
class SceneSpecError : public std::invalid_argument {
 public:
  SceneSpecError(std::string field, const std::string& why)
      : std::invalid_argument("SceneSpec." + field + ": " + why), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Hull silhouette, all values as fractions of the canvas.
struct HullShape {
  double left = 0.06;
  double right = 0.95;
  double top = 0.22;
  double bottom = 0.88;
  /// Horizontal run of the raked bow from deck to keel.
  double bow_rake = 0.10;
  /// Deck rise at the hull ends.
  double sheer = 0.03;
};

/// TS and BT shares of hull height; VS takes the remainder. A zero share
/// removes the section and the boundaries that would touch it.
struct BandFractions {
  double ts = 0.35;
  double bt = 0.18;
};

struct BlobClassSpec {
  int count = 0;
  /// Blob radius range as fractions of hull height.
  double min_radius = 0.04;
  double max_radius = 0.10;
};

/// A defect placed at an exact position (pixels). Used by oracle tests.
struct FixedBlob {
  enum class Shape { rectangle, ellipse };
  Defect defect = Defect::corrosion;
  Shape shape = Shape::rectangle;
  double row = 0;  ///< top edge
  double col = 0;  ///< left edge
  double height = 0;
  double width = 0;
};

struct TextureParams {
  double corrosion_speckle = 45.0;
  double fouling_mottle = 35.0;
  double delamination_rim = 0.22;  ///< rim thickness as a fraction of blob radius
};

enum class Background { dock, gradient, plain };

struct SceneSpec {
  int rows = 480;
  int cols = 640;
  HullShape hull;
  BandFractions bands;
  /// Amplitude of boundary waviness, fraction of canvas height.
  double boundary_wave = 0.01;
  /// Slope of both boundaries across the hull, fraction of canvas height.
  double boundary_tilt = 0.0;
  std::array<BlobClassSpec, 3> blobs{};  ///< indexed by Defect
  std::vector<FixedBlob> fixed_blobs;
  TextureParams texture;
  Background background = Background::dock;
  double noise = 4.0;
  /// Probability that a random blob is left out of the human annotation.
  double label_dropout = 0.0;
  /// Probability that a random blob is centred on an earlier blob of another class.
  double overlap_bias = 0.0;
  /// Draw hull paint colours from per-section ranges instead of fixed values.
  bool vary_colors = true;
  std::uint64_t seed = 1;
};

void validate(const SceneSpec& spec);

/// Exact geometry recorded by the generator, independent of rasterization.
struct PlacementRecord {
  /// Complete defect masks (including blobs left out of the annotation).
  MaskSet truth_masks;
  /// Pixel-centre section labels of the hull.
  SectionMap sections;
  /// Areas integrated over the continuous geometry, in pixels.
  std::array<double, 3> section_area{};
  std::array<std::array<double, 3>, 3> defect_area{};  ///< [section][defect]
  int blob_count = 0;
  int dropped_blob_count = 0;

  bool section_present(Section s) const { return section_area[section_index(s)] > 0.0; }
  /// 100 * defect area / section area, from the continuous geometry.
  double percent(Section s, Defect d) const;
};

struct GeneratedScene {
  ImageRecord record;
  PlacementRecord placement;
};

/// Deterministic in `spec` (including seed). Throws SceneSpecError.
GeneratedScene generate_scene_with_placement(const SceneSpec& spec, std::string id = "scene");
ImageRecord generate_scene(const SceneSpec& spec, std::string id = "scene");

/// Knobs for drawing randomized scene specs.
struct CorpusOptions {
  int rows = 480;
  int cols = 640;
  std::array<int, 3> max_blobs = {4, 3, 3};
  double label_dropout = 0.0;
  /// See SceneSpec::overlap_bias.
  double overlap_bias = 0.0;
  double noise = 4.0;
};

SceneSpec random_scene_spec(std::uint64_t seed, const CorpusOptions& options = {});

/// `count` scenes with ids scene_0000.. and a 70/10/20 train/val/test split.
/// Label dropout applies to the train split only; held-out scenes keep complete labels.
std::vector<GeneratedScene> generate_corpus(int count, std::uint64_t seed,
                                            const CorpusOptions& options = {});

}  // namespace hullscan::data
