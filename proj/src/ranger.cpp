#include "branchrange/ranger.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "median.hpp"

namespace branchrange {

void RangerParams::validate() const {
  require(m >= 0, ErrorKind::InvalidParams, "m must be >= 0");
  require(m == 0 || expand_radius_px >= 1.0, ErrorKind::InvalidParams, "expand_radius_px must be >= 1 when m > 0");
  require(std::isfinite(k_mad) && k_mad > 0.0, ErrorKind::InvalidParams, "k_mad must be > 0");
  require(stride >= 0, ErrorKind::InvalidParams, "stride must be >= 0");
}

std::vector<Point2> centroids_of_triplets(const std::vector<Point2>& points) {
  require(points.size() >= 3, ErrorKind::TooFewPoints,
          "need at least 3 points, got " + std::to_string(points.size()));
  std::vector<Point2> centroids;
  centroids.reserve(points.size() / 3);
  for (std::size_t i = 0; i + 2 < points.size(); i += 3) {
    centroids.push_back({(points[i].x + points[i + 1].x + points[i + 2].x) / 3.0,
                         (points[i].y + points[i + 1].y + points[i + 2].y) / 3.0});
  }
  return centroids;
}

std::vector<Point2> expand_centroids(const std::vector<Point2>& centroids, const RangerParams& params, int width,
                                     int height) {
  params.validate();
  require(width > 0 && height > 0, ErrorKind::InvalidParams, "bounds must be positive");
  std::vector<Point2> expanded;
  if (params.m == 0) return expanded;
  expanded.reserve(centroids.size() * static_cast<std::size_t>(params.m));
  for (const Point2& c : centroids) {
    for (int j = 0; j < params.m; ++j) {
      const double angle = 2.0 * std::numbers::pi * j / params.m;
      const double x = std::round(c.x + params.expand_radius_px * std::cos(angle));
      const double y = std::round(c.y - params.expand_radius_px * std::sin(angle));
      expanded.push_back({std::clamp(x, 0.0, width - 1.0), std::clamp(y, 0.0, height - 1.0)});
    }
  }
  return expanded;
}

std::vector<Point2> total_point_set(const std::vector<Point2>& centroids, const std::vector<Point2>& expanded) {
  std::vector<Point2> all;
  all.reserve(expanded.size() + centroids.size());
  all.insert(all.end(), expanded.begin(), expanded.end());
  all.insert(all.end(), centroids.begin(), centroids.end());
  return all;
}

std::vector<double> collect_depths(const std::vector<Point2>& points, const DepthMap& depth) {
  std::vector<double> values;
  values.reserve(points.size());
  for (const Point2& p : points) {
    const double rx = std::round(p.x);
    const double ry = std::round(p.y);
    require(rx >= 0 && ry >= 0 && rx < depth.width() && ry < depth.height(), ErrorKind::InvalidParams,
            "sample point outside the depth map");
    const float z = depth.at(static_cast<int>(rx), static_cast<int>(ry));
    if (is_valid_depth(z)) values.push_back(z);
  }
  require(!values.empty(), ErrorKind::NoValidDepths, "no valid depth under any sample point");
  return values;
}

MadSplit mad_filter(const std::vector<double>& values, double k_mad) {
  require(!values.empty(), ErrorKind::EmptyInput, "mad_filter needs at least one value");
  require(std::isfinite(k_mad) && k_mad > 0.0, ErrorKind::InvalidParams, "k_mad must be > 0");
  MadSplit split;
  std::vector<double> scratch = values;
  split.median = detail::median_inplace(scratch);
  for (std::size_t i = 0; i < values.size(); ++i) scratch[i] = std::fabs(values[i] - split.median);
  split.mad = detail::median_inplace(scratch);

  const double band = k_mad * split.mad;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    const bool keep = split.mad == 0.0 ? v == split.median : std::fabs(v - split.median) <= band;
    if (keep) {
      split.retained.push_back(v);
      split.retained_index.push_back(i);
    } else {
      split.rejected.push_back(v);
    }
  }
  return split;
}

double clamped_mean(const std::vector<double>& values) {
  require(!values.empty(), ErrorKind::EmptyInput, "mean of an empty set");
  double sum = 0.0;
  for (double v : values) sum += v;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return std::clamp(sum / static_cast<double>(values.size()), *lo, *hi);
}

RangeEstimate estimate_distance(const SegMask& mask, const DepthMap& depth, const RangerParams& params) {
  params.validate();
  require(mask.bitmap.same_shape(depth), ErrorKind::DimensionMismatch, "mask and depth map differ in size");

  const SamplePoints samples = sample_contour(mask, params.stride);
  const std::vector<Point2> centroids = centroids_of_triplets(samples.points);
  const std::vector<Point2> expanded = expand_centroids(centroids, params, depth.width(), depth.height());
  const std::vector<Point2> all = total_point_set(centroids, expanded);
  const std::vector<double> depths = collect_depths(all, depth);
  MadSplit split = mad_filter(depths, params.k_mad);

  RangeEstimate est;
  est.n_points = samples.points.size();
  est.n_centroids = centroids.size();
  est.n_total = all.size();
  est.n_valid_depths = depths.size();
  est.n_retained = split.retained.size();
  est.median_m = split.median;
  est.mad_m = split.mad;
  // With k_mad < 1 the band can be narrower than every deviation.
  require(!split.retained.empty(), ErrorKind::NoValidDepths, "MAD band retained no depth samples");
  est.distance_m = clamped_mean(split.retained);
  est.retained_values = std::move(split.retained);
  est.rejected_values = std::move(split.rejected);
  return est;
}

}  // namespace branchrange
