#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "branchrange/error.hpp"

namespace branchrange {

/// Rectified pinhole stereo rig. Left camera is the reference view.
struct CameraRig {
  double focal_px = 500.0;
  double baseline_m = 0.1;
  double cx_px = 320.0;
  double cy_px = 180.0;
  int width_px = 640;
  int height_px = 360;

  void validate() const;
  friend bool operator==(const CameraRig&, const CameraRig&) = default;
};

/// Dense row-major 2D grid, y increasing downward. The tag keeps images,
/// disparity maps and depth maps from being mixed up at call sites.
template <class T, class Tag>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(checked_size(width, height), fill) {}
  Grid(int width, int height, std::vector<T> data) : width_(width), height_(height), data_(std::move(data)) {
    require(data_.size() == checked_size(width, height), ErrorKind::DimensionMismatch,
            "grid data length does not equal width*height");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> row(int y) { return {data_.data() + index(0, y), static_cast<std::size_t>(width_)}; }
  std::span<const T> row(int y) const { return {data_.data() + index(0, y), static_cast<std::size_t>(width_)}; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(int w, int h) const noexcept { return w == width_ && h == height_; }
  template <class U, class V>
  bool same_shape(const Grid<U, V>& other) const noexcept {
    return same_shape(other.width(), other.height());
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static std::size_t checked_size(int width, int height) {
    require(width >= 0 && height >= 0, ErrorKind::InvalidParams, "negative grid dimension");
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct GrayTag {};
struct DisparityTag {};
struct DepthTag {};

using ImageGray = Grid<std::uint8_t, GrayTag>;
/// Disparities in pixels; negative entries are invalid.
using DisparityMap = Grid<float, DisparityTag>;
/// Depths in meters along the optical axis; non-positive entries are invalid.
using DepthMap = Grid<float, DepthTag>;

inline constexpr float kInvalidDisparity = -1.0f;
inline constexpr float kInvalidDepth = 0.0f;

inline bool is_valid_disparity(float d) noexcept { return d >= 0.0f; }
bool is_valid_depth(float z) noexcept;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const Point3&, const Point3&) = default;
};

/// Z = f * B / d. Throws ZeroOrNegativeDisparity for d <= 0.
double disparity_to_depth(double disparity_px, const CameraRig& rig);

/// d = f * B / Z. Throws NonPositiveDepth for Z <= 0.
double depth_to_disparity(double depth_m, const CameraRig& rig);

/// Elementwise triangulation. Invalid or zero disparities become invalid depth.
DepthMap depth_map_from_disparity(const DisparityMap& disparity, const CameraRig& rig);

/// Back-projects pixel `p` at depth `depth_m` into the left camera frame.
Point3 pixel_to_point(const Point2& p, double depth_m, const CameraRig& rig);

/// Pinhole projection of a camera-frame point onto the left image.
Point2 point_to_pixel(const Point3& point, const CameraRig& rig);

}  // namespace branchrange
