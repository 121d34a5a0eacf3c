#include "hullscan/data/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <iomanip>
#include <sstream>

namespace hullscan::data {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw SceneSpecError(field, why);
}

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

// Continuous hull and band geometry in pixel units (x = column, y = row).
struct Geometry {
  double width = 0, height = 0;
  double left = 0, right = 0, top = 0, bottom = 0;
  double rake = 0, sheer = 0;
  double mid = 0, half = 1;
  double ts = 0, bt = 0, vs = 0;
  bool upper_present = false, lower_present = false;
  double tilt = 0, wave = 0;
  double freq[2] = {1, 1}, phase[2] = {0, 0};

  Geometry(const SceneSpec& s, Rng& rng) {
    width = s.cols;
    height = s.rows;
    left = s.hull.left * width;
    right = s.hull.right * width;
    top = s.hull.top * height;
    bottom = s.hull.bottom * height;
    rake = s.hull.bow_rake * width;
    sheer = s.hull.sheer * height;
    mid = 0.5 * (left + right);
    half = std::max(0.5 * (right - left), 1e-9);
    ts = s.bands.ts;
    bt = s.bands.bt;
    vs = std::max(0.0, 1.0 - ts - bt);
    constexpr double kTiny = 1e-12;
    upper_present = ts > kTiny && bt + vs > kTiny;
    lower_present = vs > kTiny && ts + bt > kTiny;
    tilt = s.boundary_tilt * height;
    wave = s.boundary_wave * height;
    for (int i = 0; i < 2; ++i) {
      freq[i] = uniform(rng, 0.5, 2.0);
      phase[i] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    }
  }

  double deck(double x) const {
    const double u = (x - mid) / half;
    return top - sheer * u * u;
  }
  // Lowest hull point at column x (keel, or the raked bow line).
  double keel(double x) const {
    if (rake <= 0.0) return bottom;
    return std::min(bottom, top + (x - left) * (bottom - top) / rake);
  }
  bool inside_hull(double x, double y) const {
    return x >= left && x <= right && y >= deck(x) && y <= keel(x);
  }
  double curve(int i, double x) const {
    const double share = i == 0 ? ts : ts + bt;
    return top + share * (bottom - top) + tilt * (x - mid) / half +
           wave * std::sin(2.0 * std::numbers::pi * freq[i] * x / width + phase[i]);
  }
  bool boundary_present(int i) const { return i == 0 ? upper_present : lower_present; }
  double boundary(int i, double x) const {
    if (i == 1 && upper_present) return std::max(curve(0, x), curve(1, x));
    return curve(i, x);
  }
  // Section cut points at column x: TS is [deck, c1), BT [c1, c2), VS [c2, keel].
  std::pair<double, double> cuts(double x) const {
    const double lo = deck(x), hi = keel(x);
    double c1 = upper_present ? std::clamp(curve(0, x), lo, hi) : (ts > 0.0 ? hi : lo);
    double c2 = lower_present ? std::clamp(boundary(1, x), lo, hi) : (vs > 0.0 ? lo : hi);
    c2 = std::max(c1, c2);
    return {c1, c2};
  }
  Section section_at(double x, double y) const {
    const auto [c1, c2] = cuts(x);
    if (y < c1) return Section::ts;
    if (y < c2) return Section::bt;
    return Section::vs;
  }
};

struct Blob {
  Defect defect = Defect::corrosion;
  bool rectangle = false;
  double cx = 0, cy = 0, a = 1, b = 1, angle = 0, wobble = 0, lobes = 3, phase = 0;
  double row = 0, col = 0, h = 0, w = 0;  // rectangle
  bool labeled = true;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // bounding box

  // Normalized radius (<= 1 on the blob) and the local boundary radius.
  std::pair<double, double> radial(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double ca = std::cos(angle), sa = std::sin(angle);
    const double u = (ca * dx + sa * dy) / a;
    const double v = (-sa * dx + ca * dy) / b;
    const double rho = std::hypot(u, v);
    const double edge = 1.0 + wobble * std::sin(lobes * std::atan2(v, u) + phase);
    return {rho, edge};
  }
  bool contains(double x, double y) const {
    if (x < x0 || x >= x1 || y < y0 || y >= y1) return false;
    if (rectangle) return true;
    const auto [rho, edge] = radial(x, y);
    return rho <= edge;
  }
  // Fraction of the way from centre to edge (rectangles: Chebyshev distance).
  double depth(double x, double y) const {
    if (rectangle) {
      const double u = std::abs(x - (col + 0.5 * w)) / (0.5 * w);
      const double v = std::abs(y - (row + 0.5 * h)) / (0.5 * h);
      return std::max(u, v);
    }
    const auto [rho, edge] = radial(x, y);
    return rho / edge;
  }
};

Blob make_rect(const FixedBlob& f) {
  Blob b;
  b.defect = f.defect;
  b.rectangle = f.shape == FixedBlob::Shape::rectangle;
  b.row = f.row;
  b.col = f.col;
  b.h = f.height;
  b.w = f.width;
  if (b.rectangle) {
    b.x0 = f.col;
    b.x1 = f.col + f.width;
    b.y0 = f.row;
    b.y1 = f.row + f.height;
  } else {
    b.cx = f.col + 0.5 * f.width;
    b.cy = f.row + 0.5 * f.height;
    b.a = 0.5 * f.width;
    b.b = 0.5 * f.height;
    b.x0 = f.col;
    b.x1 = f.col + f.width;
    b.y0 = f.row;
    b.y1 = f.row + f.height;
  }
  return b;
}

// Smooth random field on a coarse lattice, bilinearly interpolated.
class ValueNoise {
 public:
  ValueNoise(int rows, int cols, double cell, Rng& rng) : cell_(cell) {
    nr_ = static_cast<int>(rows / cell) + 2;
    nc_ = static_cast<int>(cols / cell) + 2;
    values_.resize(static_cast<std::size_t>(nr_) * nc_);
    for (double& v : values_) v = uniform(rng, -1.0, 1.0);
  }
  double operator()(double x, double y) const {
    const double gx = x / cell_, gy = y / cell_;
    const int ix = std::clamp(static_cast<int>(gx), 0, nc_ - 2);
    const int iy = std::clamp(static_cast<int>(gy), 0, nr_ - 2);
    const double fx = gx - ix, fy = gy - iy;
    auto at = [&](int r, int c) { return values_[static_cast<std::size_t>(r) * nc_ + c]; };
    return (1 - fy) * ((1 - fx) * at(iy, ix) + fx * at(iy, ix + 1)) +
           fy * ((1 - fx) * at(iy + 1, ix) + fx * at(iy + 1, ix + 1));
  }

 private:
  double cell_;
  int nr_ = 0, nc_ = 0;
  std::vector<double> values_;
};

using Color = std::array<double, 3>;

Color jitter(const Color& c, double amount, Rng& rng, bool enabled) {
  if (!enabled) return c;
  Color out = c;
  const double common = uniform(rng, -amount, amount);
  for (double& v : out) v += common + uniform(rng, -0.3 * amount, 0.3 * amount);
  return out;
}

}  // namespace

void validate(const SceneSpec& s) {
  require(s.rows >= 8 && s.cols >= 8, "rows/cols", "canvas must be at least 8x8");
  require(in_unit(s.hull.left), "hull.left", "must lie in [0,1]");
  require(in_unit(s.hull.right), "hull.right", "must lie in [0,1]");
  require(in_unit(s.hull.top), "hull.top", "must lie in [0,1]");
  require(in_unit(s.hull.bottom), "hull.bottom", "must lie in [0,1]");
  require(s.hull.left < s.hull.right, "hull.right", "must exceed hull.left");
  require(s.hull.top < s.hull.bottom, "hull.bottom", "must exceed hull.top");
  require(s.hull.bow_rake >= 0.0 && s.hull.bow_rake < s.hull.right - s.hull.left,
          "hull.bow_rake", "must be non-negative and narrower than the hull");
  require(s.hull.sheer >= 0.0 && s.hull.sheer <= s.hull.top, "hull.sheer",
          "must be non-negative and keep the deck on the canvas");
  require(in_unit(s.bands.ts), "bands.ts", "must lie in [0,1]");
  require(in_unit(s.bands.bt), "bands.bt", "must lie in [0,1]");
  require(s.bands.ts + s.bands.bt <= 1.0 + 1e-12, "bands", "ts + bt must not exceed 1");
  require(std::isfinite(s.boundary_wave) && s.boundary_wave >= 0.0, "boundary_wave",
          "must be non-negative");
  require(std::isfinite(s.boundary_tilt), "boundary_tilt", "must be finite");
  for (Defect d : kDefects) {
    const auto& b = s.blobs[static_cast<int>(d)];
    const std::string field = "blobs." + std::string(defect_name(d));
    require(b.count >= 0, field + ".count", "must be non-negative");
    require(b.min_radius > 0.0 && b.min_radius <= b.max_radius && b.max_radius <= 1.0,
            field + ".radius", "need 0 < min_radius <= max_radius <= 1");
  }
  for (std::size_t i = 0; i < s.fixed_blobs.size(); ++i) {
    const auto& f = s.fixed_blobs[i];
    require(f.width > 0 && f.height > 0, "fixed_blobs[" + std::to_string(i) + "]",
            "needs positive size");
  }
  require(std::isfinite(s.noise) && s.noise >= 0.0, "noise", "must be non-negative");
  require(in_unit(s.label_dropout), "label_dropout", "must lie in [0,1]");
}

double PlacementRecord::percent(Section s, Defect d) const {
  const double area = section_area[section_index(s)];
  if (area <= 0.0) return 0.0;
  return 100.0 * defect_area[section_index(s)][static_cast<int>(d)] / area;
}

GeneratedScene generate_scene_with_placement(const SceneSpec& spec, std::string id) {
  validate(spec);
  Rng rng(spec.seed);
  Rng label_rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  const int rows = spec.rows, cols = spec.cols;
  const Geometry g(spec, rng);

  // Blob placement.
  std::vector<Blob> blobs;
  for (const auto& f : spec.fixed_blobs) blobs.push_back(make_rect(f));
  const double hull_height = g.bottom - g.top;
  for (Defect d : kDefects) {
    const auto& cls = spec.blobs[static_cast<int>(d)];
    for (int n = 0; n < cls.count; ++n) {
      Blob b;
      b.defect = d;
      bool placed = false;
      const Blob* anchor = nullptr;
      if (spec.overlap_bias > 0.0 && uniform(rng, 0.0, 1.0) < spec.overlap_bias) {
        std::vector<const Blob*> others;
        for (const Blob& o : blobs)
          if (o.defect != d && !o.rectangle) others.push_back(&o);
        if (!others.empty()) anchor = others[uniform_int(rng, 0, static_cast<int>(others.size()) - 1)];
      }
      for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
        double x = uniform(rng, g.left, g.right);
        double y = uniform(rng, g.deck(x), g.bottom);
        if (anchor != nullptr && attempt < 100) {
          x = anchor->cx + uniform(rng, -0.6, 0.6) * anchor->a;
          y = anchor->cy + uniform(rng, -0.6, 0.6) * anchor->b;
        }
        if (!g.inside_hull(x, y)) continue;
        if (d == Defect::fouling && g.section_at(x, y) == Section::ts) continue;
        b.cx = x;
        b.cy = y;
        placed = true;
      }
      const double r = uniform(rng, cls.min_radius, cls.max_radius) * hull_height;
      const double stretch = d == Defect::delamination ? uniform(rng, 1.2, 1.8) : uniform(rng, 0.8, 1.3);
      b.a = r * stretch;
      b.b = r * uniform(rng, 0.55, 1.0);
      b.angle = uniform(rng, 0.0, std::numbers::pi);
      b.wobble = uniform(rng, 0.0, 0.25);
      b.lobes = uniform_int(rng, 3, 5);
      b.phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      const double reach = std::max(b.a, b.b) * (1.0 + b.wobble);
      b.x0 = b.cx - reach;
      b.x1 = b.cx + reach;
      b.y0 = b.cy - reach;
      b.y1 = b.cy + reach;
      b.labeled = uniform(label_rng, 0.0, 1.0) >= spec.label_dropout;
      if (placed) blobs.push_back(b);
    }
  }

  auto defect_at = [&](const Blob& b, double x, double y) {
    if (!b.contains(x, y) || !g.inside_hull(x, y)) return false;
    return b.defect != Defect::fouling || g.section_at(x, y) != Section::ts;
  };

  GeneratedScene out;
  ImageRecord& rec = out.record;
  PlacementRecord& pl = out.placement;
  rec.id = std::move(id);
  rec.pixels = RgbImage(rows, cols);
  rec.ship_mask = BinaryMask(rows, cols);
  rec.defect_masks = MaskSet(rows, cols);
  pl.truth_masks = MaskSet(rows, cols);
  pl.sections = SectionMap(rows, cols, Section::background);
  pl.blob_count = static_cast<int>(blobs.size());
  pl.dropped_blob_count =
      static_cast<int>(std::count_if(blobs.begin(), blobs.end(), [](const Blob& b) { return !b.labeled; }));

  // Palette.
  const bool vary = spec.vary_colors;
  static const std::array<Color, 3> kTopside = {Color{105, 115, 130}, Color{130, 132, 126},
                                                Color{80, 95, 122}};
  const Color ts_color = jitter(kTopside[vary ? uniform_int(rng, 0, 2) : 0], 12, rng, vary);
  const Color bt_color = jitter({40, 40, 46}, 8, rng, vary);
  const Color vs_color = jitter({140, 46, 40}, 12, rng, vary);
  const Color rust = jitter({172, 92, 42}, 8, rng, vary);
  const Color primer = jitter({226, 220, 204}, 6, rng, vary);
  const Color rim = {85, 74, 68};
  const Color growth = jitter({76, 112, 52}, 8, rng, vary);

  ValueNoise hull_noise(rows, cols, 24.0, rng);
  ValueNoise mottle(rows, cols, 5.0, rng);
  ValueNoise sky_noise(rows, cols, 60.0, rng);

  // Background.
  std::vector<std::array<double, 4>> clutter;  // x0, y0, x1, y1
  if (spec.background == Background::dock) {
    const int n = uniform_int(rng, 2, 5);
    for (int i = 0; i < n; ++i) {
      const double x0 = uniform(rng, 0, cols), y0 = uniform(rng, 0, rows);
      clutter.push_back({x0, y0, x0 + uniform(rng, 8, 60), y0 + uniform(rng, 20, 160)});
    }
  }
  const double horizon = uniform(rng, 0.55, 0.8) * rows;
  const Color sky_top = jitter({150, 175, 205}, 15, rng, vary);
  const Color ground = jitter({105, 102, 98}, 15, rng, vary);

  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int r = 0; r < rows; ++r) {
    const double y = r + 0.5;
    for (int c = 0; c < cols; ++c) {
      const double x = c + 0.5;
      Color px;
      if (g.inside_hull(x, y)) {
        rec.ship_mask->set(r, c);
        const Section s = g.section_at(x, y);
        pl.sections.at(r, c) = s;
        const Color& base = s == Section::ts ? ts_color : (s == Section::bt ? bt_color : vs_color);
        const double shade = 8.0 * hull_noise(x, y);
        px = {base[0] + shade, base[1] + shade, base[2] + shade};

        Color sum{0, 0, 0};
        int layers = 0;
        std::array<bool, 3> hit{};
        for (const Blob& b : blobs) {
          if (!defect_at(b, x, y)) continue;
          const int di = static_cast<int>(b.defect);
          pl.truth_masks[b.defect].set(r, c);
          if (b.labeled) (*rec.defect_masks)[b.defect].set(r, c);
          if (hit[di]) continue;
          hit[di] = true;
          Color tex;
          switch (b.defect) {
            case Defect::corrosion: {
              const double sp = spec.texture.corrosion_speckle * uniform(rng, -1.0, 1.0);
              const double dark = mottle(x * 1.7, y * 1.7) > 0.45 ? -55.0 : 0.0;
              tex = {rust[0] + sp + dark, rust[1] + 0.6 * sp + dark, rust[2] + 0.3 * sp + 0.5 * dark};
              break;
            }
            case Defect::delamination: {
              const bool on_rim = b.depth(x, y) > 1.0 - spec.texture.delamination_rim;
              tex = on_rim ? rim : primer;
              break;
            }
            case Defect::fouling: {
              const double m = spec.texture.fouling_mottle * mottle(x, y);
              tex = {growth[0] + 0.5 * m, growth[1] + m, growth[2] + 0.4 * m};
              break;
            }
          }
          for (int k = 0; k < 3; ++k) sum[k] += tex[k];
          ++layers;
        }
        if (layers > 0)
          for (int k = 0; k < 3; ++k) px[k] = sum[k] / layers;
      } else if (spec.background == Background::plain) {
        px = {128, 128, 128};
      } else {
        const double t = std::min(1.0, y / std::max(horizon, 1.0));
        if (y < horizon) {
          const double n = 10.0 * sky_noise(x, y);
          px = {sky_top[0] + 40 * t + n, sky_top[1] + 30 * t + n, sky_top[2] + 15 * t + n};
        } else {
          const double n = 12.0 * sky_noise(x * 2, y * 2);
          px = {ground[0] + n, ground[1] + n, ground[2] + n};
        }
        for (const auto& k : clutter) {
          if (x >= k[0] && x < k[2] && y >= k[1] && y < k[3]) px = {60, 58, 62};
        }
      }
      for (int k = 0; k < 3; ++k) {
        const double v = px[k] + (spec.noise > 0 ? spec.noise * gauss(rng) : 0.0);
        rec.pixels.at(r, c, k) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }

  // Boundary annotation at column centres.
  BoundaryPair bp(cols);
  for (int i = 0; i < 2; ++i) {
    if (!g.boundary_present(i)) continue;
    for (int c = 0; c < cols; ++c) {
      const double x = c + 0.5;
      const double y = g.boundary(i, x);
      if (!g.inside_hull(x, y)) continue;
      bp.y[i][c] = std::clamp(y / rows, 0.0, 1.0);
      bp.valid[i][c] = 1;
    }
  }
  for (int c = 0; c < cols; ++c)
    if (bp.valid[0][c] && bp.valid[1][c]) bp.y[1][c] = std::max(bp.y[0][c], bp.y[1][c]);
  rec.boundaries = std::move(bp);

  // Areas from the continuous geometry: column integration for sections,
  // 4x4 supersampling for defects.
  constexpr int kColumnSamples = 8;
  for (int c = 0; c < cols; ++c) {
    for (int k = 0; k < kColumnSamples; ++k) {
      const double x = c + (k + 0.5) / kColumnSamples;
      if (x < g.left || x > g.right) continue;
      const double lo = std::max(g.deck(x), 0.0), hi = std::min(g.keel(x), double(rows));
      if (hi <= lo) continue;
      const auto [c1, c2] = g.cuts(x);
      const double w = 1.0 / kColumnSamples;
      pl.section_area[0] += w * (std::clamp(c1, lo, hi) - lo);
      pl.section_area[1] += w * (std::clamp(c2, lo, hi) - std::clamp(c1, lo, hi));
      pl.section_area[2] += w * (hi - std::clamp(c2, lo, hi));
    }
  }
  constexpr int kSub = 4;
  for (Defect d : kDefects) {
    double bx0 = cols, bx1 = 0, by0 = rows, by1 = 0;
    bool any = false;
    for (const Blob& b : blobs) {
      if (b.defect != d) continue;
      any = true;
      bx0 = std::min(bx0, b.x0);
      bx1 = std::max(bx1, b.x1);
      by0 = std::min(by0, b.y0);
      by1 = std::max(by1, b.y1);
    }
    if (!any) continue;
    const int r0 = std::max(0, static_cast<int>(std::floor(by0)));
    const int r1 = std::min(rows, static_cast<int>(std::ceil(by1)));
    const int c0 = std::max(0, static_cast<int>(std::floor(bx0)));
    const int c1 = std::min(cols, static_cast<int>(std::ceil(bx1)));
    for (int r = r0; r < r1; ++r) {
      for (int c = c0; c < c1; ++c) {
        for (int sy = 0; sy < kSub; ++sy) {
          for (int sx = 0; sx < kSub; ++sx) {
            const double x = c + (sx + 0.5) / kSub, y = r + (sy + 0.5) / kSub;
            const bool covered = std::any_of(blobs.begin(), blobs.end(), [&](const Blob& b) {
              return b.defect == d && defect_at(b, x, y);
            });
            if (covered)
              pl.defect_area[section_index(g.section_at(x, y))][static_cast<int>(d)] +=
                  1.0 / (kSub * kSub);
          }
        }
      }
    }
  }
  return out;
}

ImageRecord generate_scene(const SceneSpec& spec, std::string id) {
  return generate_scene_with_placement(spec, std::move(id)).record;
}

SceneSpec random_scene_spec(std::uint64_t seed, const CorpusOptions& o) {
  Rng rng(seed * 0x2545F4914F6CDD1DULL + 17);
  SceneSpec s;
  s.rows = o.rows;
  s.cols = o.cols;
  s.seed = seed;
  s.hull.left = uniform(rng, 0.02, 0.12);
  s.hull.right = uniform(rng, 0.88, 0.98);
  s.hull.top = uniform(rng, 0.14, 0.28);
  s.hull.bottom = uniform(rng, 0.82, 0.96);
  s.hull.bow_rake = uniform(rng, 0.03, 0.14);
  s.hull.sheer = uniform(rng, 0.0, std::min(0.04, s.hull.top));
  s.bands.ts = uniform(rng, 0.25, 0.45);
  s.bands.bt = uniform(rng, 0.12, 0.25);
  s.boundary_wave = uniform(rng, 0.0, 0.012);
  s.boundary_tilt = uniform(rng, -0.03, 0.03);
  s.background = uniform(rng, 0, 1) < 0.7 ? Background::dock : Background::gradient;
  s.noise = o.noise;
  s.label_dropout = o.label_dropout;
  s.overlap_bias = o.overlap_bias;
  for (Defect d : kDefects) {
    auto& b = s.blobs[static_cast<int>(d)];
    const int hi = o.max_blobs[static_cast<int>(d)];
    b.count = hi > 0 ? uniform_int(rng, d == Defect::corrosion ? 1 : 0, hi) : 0;
    b.min_radius = 0.05;
    b.max_radius = d == Defect::fouling ? 0.13 : 0.10;
  }
  return s;
}

std::vector<GeneratedScene> generate_corpus(int count, std::uint64_t seed,
                                            const CorpusOptions& options) {
  std::vector<GeneratedScene> scenes;
  scenes.reserve(count);
  for (int i = 0; i < count; ++i) {
    std::ostringstream id;
    id << "scene_" << std::setfill('0') << std::setw(4) << i;
    SceneSpec spec = random_scene_spec(seed + static_cast<std::uint64_t>(i) * 7919, options);
    const int bucket = i % 10;
    const Split split = bucket < 7 ? Split::train : (bucket < 8 ? Split::val : Split::test);
    if (split != Split::train) spec.label_dropout = 0.0;
    GeneratedScene g = generate_scene_with_placement(spec, id.str());
    g.record.split = split;
    scenes.push_back(std::move(g));
  }
  return scenes;
}

}  // namespace hullscan::data
