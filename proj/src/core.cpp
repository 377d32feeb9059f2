#include "branchrange/core.hpp"

#include <cmath>
#include <string>

namespace branchrange {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroOrNegativeDisparity: return "ZeroOrNegativeDisparity";
    case ErrorKind::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorKind::WindowTooLarge: return "WindowTooLarge";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::DegenerateMask: return "DegenerateMask";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NoValidDepths: return "NoValidDepths";
    case ErrorKind::SpecInvalid: return "SpecInvalid";
  }
  return "Unknown";
}

void CameraRig::validate() const {
  require(std::isfinite(focal_px) && focal_px > 0.0, ErrorKind::InvalidParams, "focal_px must be positive");
  require(std::isfinite(baseline_m) && baseline_m > 0.0, ErrorKind::InvalidParams, "baseline_m must be positive");
  require(width_px > 0 && height_px > 0, ErrorKind::InvalidParams, "image dimensions must be positive");
  require(cx_px >= 0.0 && cx_px < width_px, ErrorKind::InvalidParams, "cx_px outside [0, width)");
  require(cy_px >= 0.0 && cy_px < height_px, ErrorKind::InvalidParams, "cy_px outside [0, height)");
}

bool is_valid_depth(float z) noexcept { return std::isfinite(z) && z > 0.0f; }

double disparity_to_depth(double disparity_px, const CameraRig& rig) {
  if (!(disparity_px > 0.0)) {
    fail(ErrorKind::ZeroOrNegativeDisparity, "disparity " + std::to_string(disparity_px) + " has no finite depth");
  }
  return rig.focal_px * rig.baseline_m / disparity_px;
}

double depth_to_disparity(double depth_m, const CameraRig& rig) {
  require(depth_m > 0.0, ErrorKind::NonPositiveDepth, "depth must be positive");
  return rig.focal_px * rig.baseline_m / depth_m;
}

DepthMap depth_map_from_disparity(const DisparityMap& disparity, const CameraRig& rig) {
  require(disparity.same_shape(rig.width_px, rig.height_px), ErrorKind::DimensionMismatch,
          "disparity map size differs from rig image size");
  DepthMap depth(disparity.width(), disparity.height(), kInvalidDepth);
  const double fb = rig.focal_px * rig.baseline_m;
  const auto& src = disparity.data();
  auto& dst = depth.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    // d == 0 is a legal match at infinity; it has no finite depth.
    if (src[i] > 0.0f) dst[i] = static_cast<float>(fb / static_cast<double>(src[i]));
  }
  return depth;
}

Point3 pixel_to_point(const Point2& p, double depth_m, const CameraRig& rig) {
  require(depth_m > 0.0, ErrorKind::NonPositiveDepth, "back-projection needs positive depth");
  return {(p.x - rig.cx_px) * depth_m / rig.focal_px, (p.y - rig.cy_px) * depth_m / rig.focal_px, depth_m};
}

Point2 point_to_pixel(const Point3& point, const CameraRig& rig) {
  require(point.z > 0.0, ErrorKind::NonPositiveDepth, "point behind the camera");
  return {rig.focal_px * point.x / point.z + rig.cx_px, rig.focal_px * point.y / point.z + rig.cy_px};
}

}  // namespace branchrange
