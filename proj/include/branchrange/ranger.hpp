#pragma once

#include <vector>

#include "branchrange/core.hpp"
#include "branchrange/mask.hpp"

namespace branchrange {

struct RangerParams {
  /// Expansion points generated around each triplet centroid.
  int m = 4;
  double expand_radius_px = 2.0;
  /// Half-width of the retention band, in multiples of the MAD.
  double k_mad = 3.0;
  /// Contour sampling stride; 0 picks ceil(boundary_length / 90).
  int stride = 0;

  void validate() const;
  friend bool operator==(const RangerParams&, const RangerParams&) = default;
};

struct RangeEstimate {
  double distance_m = 0.0;
  double median_m = 0.0;
  double mad_m = 0.0;
  std::size_t n_points = 0;
  std::size_t n_centroids = 0;
  std::size_t n_total = 0;
  std::size_t n_valid_depths = 0;
  std::size_t n_retained = 0;
  std::vector<double> retained_values;
  std::vector<double> rejected_values;
};

/// Centroids of consecutive disjoint triples; 1-2 trailing points are dropped,
/// so the result has floor(n / 3) entries.
std::vector<Point2> centroids_of_triplets(const std::vector<Point2>& points);

/// m points per centroid at angles 2*pi*j/m on a circle of the given radius,
/// angle 0 along +x and increasing toward -y (counterclockwise on screen),
/// rounded to the nearest pixel and clamped into the image.
std::vector<Point2> expand_centroids(const std::vector<Point2>& centroids, const RangerParams& params, int width,
                                     int height);

/// Expanded points followed by the centroids (a multiset; duplicates kept).
std::vector<Point2> total_point_set(const std::vector<Point2>& centroids, const std::vector<Point2>& expanded);

/// Depth at the nearest pixel of each point, skipping invalid depths.
/// Throws NoValidDepths if nothing valid remains.
std::vector<double> collect_depths(const std::vector<Point2>& points, const DepthMap& depth);

struct MadSplit {
  double median = 0.0;
  double mad = 0.0;
  std::vector<double> retained;
  std::vector<double> rejected;
  /// Input positions of the retained values, ascending.
  std::vector<std::size_t> retained_index;
};

/// Keeps v iff |v - median| <= k_mad * MAD, where MAD is the median of the
/// absolute deviations from the median. When MAD is 0 only values equal to
/// the median survive. Both output lists preserve input order.
MadSplit mad_filter(const std::vector<double>& values, double k_mad);

/// Arithmetic mean clamped into [min, max] of the values, so rounding in
/// the sum never moves it outside the sample range. Throws EmptyInput.
double clamped_mean(const std::vector<double>& values);

/// Contour sampling, triplet centroids, expansion, depth lookup, MAD
/// rejection and the mean of what survives.
RangeEstimate estimate_distance(const SegMask& mask, const DepthMap& depth, const RangerParams& params);

}  // namespace branchrange
