#include "branchrange/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace branchrange {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double lattice(std::uint64_t seed, std::int64_t ix, std::int64_t iy) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(ix)));
  h = splitmix64(h ^ static_cast<std::uint64_t>(iy));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

struct Octave {
  double cell;
  double weight;
};

// Coarse structure plus strong pixel-scale detail for the matcher to lock on.
constexpr Octave kOctaves[] = {{32.0, 0.10}, {16.0, 0.10}, {8.0, 0.15}, {4.0, 0.20}, {2.0, 0.20}, {1.0, 0.25}};

// Value noise in [0, 1], continuous in (u, v).
double value_noise(std::uint64_t seed, double u, double v) {
  double total = 0.0;
  std::uint64_t octave_seed = seed;
  for (const Octave& o : kOctaves) {
    octave_seed = splitmix64(octave_seed);
    const double su = u / o.cell;
    const double sv = v / o.cell;
    const double fu = std::floor(su);
    const double fv = std::floor(sv);
    const auto iu = static_cast<std::int64_t>(fu);
    const auto iv = static_cast<std::int64_t>(fv);
    const double tu = smooth(su - fu);
    const double tv = smooth(sv - fv);
    const double a = lattice(octave_seed, iu, iv);
    const double b = lattice(octave_seed, iu + 1, iv);
    const double c = lattice(octave_seed, iu, iv + 1);
    const double d = lattice(octave_seed, iu + 1, iv + 1);
    total += o.weight * ((a + (b - a) * tu) * (1.0 - tv) + (c + (d - c) * tu) * tv);
  }
  return total;
}

struct Surface {
  double depth;
  double disparity;
  double base;
  std::uint64_t seed;
  bool is_band;
  Point2 center;
  double nx;
  double ny;
  double radius;

  bool covers(double x, double y) const {
    if (!is_band) return true;
    return std::fabs((x - center.x) * nx + (y - center.y) * ny) <= radius;
  }
  double shade(double x, double y) const { return base + 120.0 * (value_noise(seed, x, y) - 0.5); }
};

double axis_angle_rad(const Cylinder& c) {
  switch (c.orientation) {
    case BandOrientation::Vertical: return std::numbers::pi / 2.0;
    case BandOrientation::Horizontal: return 0.0;
    case BandOrientation::Angled: return c.angle_deg * std::numbers::pi / 180.0;
  }
  return 0.0;
}

std::vector<Surface> build_surfaces(const SceneSpec& spec) {
  const double fb = spec.rig.focal_px * spec.rig.baseline_m;
  std::vector<Surface> surfaces;
  surfaces.push_back({spec.background_depth_m, fb / spec.background_depth_m, 140.0, splitmix64(spec.texture_seed),
                      false, {}, 0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < spec.cylinders.size(); ++i) {
    const Cylinder& c = spec.cylinders[i];
    const double theta = axis_angle_rad(c);
    // Exact normals for the axis-aligned cases.
    double nx = -std::sin(theta);
    double ny = std::cos(theta);
    if (c.orientation == BandOrientation::Vertical) {
      nx = -1.0;
      ny = 0.0;
    } else if (c.orientation == BandOrientation::Horizontal) {
      nx = 0.0;
      ny = 1.0;
    }
    surfaces.push_back({c.depth_m, fb / c.depth_m, 95.0, splitmix64(spec.texture_seed + 0x1000 * (i + 1)), true,
                        c.center_px, nx, ny, c.radius_px});
  }
  return surfaces;
}

std::uint8_t quantize(double v) { return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0)); }

}  // namespace

void SceneSpec::validate() const {
  try {
    rig.validate();
  } catch (const Error& e) {
    fail(ErrorKind::SpecInvalid, e.what());
  }
  require(d_max >= 1, ErrorKind::SpecInvalid, "d_max must be >= 1");
  require(std::isfinite(background_depth_m) && background_depth_m > 0.0, ErrorKind::SpecInvalid,
          "background depth must be positive");
  require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, ErrorKind::SpecInvalid, "noise_sigma must be >= 0");
  const double fb = rig.focal_px * rig.baseline_m;
  require(fb / background_depth_m <= d_max, ErrorKind::SpecInvalid, "background disparity exceeds d_max");
  for (const Cylinder& c : cylinders) {
    require(std::isfinite(c.depth_m) && c.depth_m > 0.0, ErrorKind::SpecInvalid, "cylinder depth must be positive");
    require(c.depth_m < background_depth_m, ErrorKind::SpecInvalid, "cylinder must be nearer than the background");
    require(fb / c.depth_m <= d_max, ErrorKind::SpecInvalid,
            "cylinder disparity " + std::to_string(fb / c.depth_m) + " exceeds d_max");
    require(std::isfinite(c.radius_px) && c.radius_px > 0.0, ErrorKind::SpecInvalid, "radius must be positive");
    require(std::isfinite(c.center_px.x) && std::isfinite(c.center_px.y) && std::isfinite(c.angle_deg),
            ErrorKind::SpecInvalid, "cylinder geometry must be finite");
  }
}

SceneBundle generate_scene(const SceneSpec& spec) {
  spec.validate();
  const int w = spec.rig.width_px;
  const int h = spec.rig.height_px;
  const std::vector<Surface> surfaces = build_surfaces(spec);

  // Nearest surface covering a left-image position, given each surface's shift.
  const auto front = [&](double x, double y, bool right_view) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < surfaces.size(); ++s) {
      const double sx = right_view ? x + surfaces[s].disparity : x;
      if (surfaces[s].covers(sx, y) && surfaces[s].depth < surfaces[best].depth) best = s;
    }
    return best;
  };

  SceneBundle bundle;
  bundle.spec = spec;
  bundle.left = ImageGray(w, h);
  bundle.right = ImageGray(w, h);
  bundle.gt_disparity = DisparityMap(w, h);
  bundle.mask.bitmap = MaskBitmap(w, h, 0);

  std::mt19937_64 left_rng(splitmix64(spec.texture_seed ^ 0x4c454654ull));
  std::mt19937_64 right_rng(splitmix64(spec.texture_seed ^ 0x52494748ull));
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sigma = spec.noise_sigma;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t s = front(x, y, false);
      const Surface& surf = surfaces[s];
      const double n = sigma > 0.0 ? sigma * noise(left_rng) : 0.0;
      bundle.left.at(x, y) = quantize(surf.shade(x, y) + n);
      bundle.gt_disparity.at(x, y) = static_cast<float>(surf.disparity);
      bundle.mask.bitmap.at(x, y) = s > 0 ? 1 : 0;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Surface& surf = surfaces[front(x, y, true)];
      const double n = sigma > 0.0 ? sigma * noise(right_rng) : 0.0;
      bundle.right.at(x, y) = quantize(surf.shade(x + surf.disparity, y) + n);
    }
  }
  bundle.gt_depth = depth_map_from_disparity(bundle.gt_disparity, spec.rig);
  return bundle;
}

double protocol_radius_px(double focal_px, double depth_m) {
  return std::max(4.0, std::round(focal_px * 0.02 / depth_m));
}

std::vector<SceneSpec> paper_protocol_specs(const CameraRig& rig, std::uint64_t seed, int d_max) {
  rig.validate();
  std::vector<SceneSpec> specs;
  for (const double z : {1.0, 1.5, 2.0}) {
    SceneSpec spec;
    spec.rig = rig;
    spec.background_depth_m = 4.0;
    spec.texture_seed = splitmix64(seed + specs.size());
    spec.d_max = d_max;
    spec.cylinders.push_back(
        {{rig.cx_px, rig.cy_px}, protocol_radius_px(rig.focal_px, z), z, BandOrientation::Vertical, 0.0});
    specs.push_back(spec);
  }
  return specs;
}

std::vector<SceneBundle> paper_protocol_scenes(const CameraRig& rig, std::uint64_t seed, int d_max) {
  std::vector<SceneBundle> bundles;
  for (const SceneSpec& spec : paper_protocol_specs(rig, seed, d_max)) bundles.push_back(generate_scene(spec));
  return bundles;
}

}  // namespace branchrange
