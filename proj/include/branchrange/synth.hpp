#pragma once

#include <cstdint>
#include <vector>

#include "branchrange/core.hpp"
#include "branchrange/mask.hpp"

namespace branchrange {

enum class BandOrientation { Vertical, Horizontal, Angled };

/// A branch rendered as a fronto-parallel textured band of constant depth
/// that crosses the whole frame.
struct Cylinder {
  Point2 center_px;
  double radius_px = 10.0;
  double depth_m = 1.0;
  BandOrientation orientation = BandOrientation::Vertical;
  /// Axis angle in degrees from +x (toward +y), used only for Angled.
  double angle_deg = 0.0;

  friend bool operator==(const Cylinder&, const Cylinder&) = default;
};

struct SceneSpec {
  CameraRig rig;
  double background_depth_m = 4.0;
  std::vector<Cylinder> cylinders;
  std::uint64_t texture_seed = 1;
  double noise_sigma = 2.0;
  /// Largest disparity the scene may contain.
  int d_max = 64;

  /// Throws SpecInvalid.
  void validate() const;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

struct SceneBundle {
  ImageGray left;
  ImageGray right;
  DisparityMap gt_disparity;
  DepthMap gt_depth;
  SegMask mask;
  SceneSpec spec;
};

/// Renders a rectified pair with exact ground truth. Each surface carries its
/// own seeded value-noise texture; the right view samples every surface at
/// x + d, nearest surface wins, and independent Gaussian noise is added to
/// each view.
SceneBundle generate_scene(const SceneSpec& spec);

/// Branch radius in pixels for a ~4 cm branch: max(4, round(f * 0.02 / Z)).
double protocol_radius_px(double focal_px, double depth_m);

/// One vertical branch through the principal point at 1.0, 1.5 and 2.0 m over
/// a 4.0 m background, in ascending depth.
std::vector<SceneSpec> paper_protocol_specs(const CameraRig& rig, std::uint64_t seed, int d_max = 64);
std::vector<SceneBundle> paper_protocol_scenes(const CameraRig& rig, std::uint64_t seed, int d_max = 64);

}  // namespace branchrange
