#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "branchrange/core.hpp"

namespace branchrange {

enum class CostMetric { SAD, Census };

/// Matching and aggregation settings shared by block matching and SGBM.
struct MatchParams {
  int d_max = 64;
  int window_radius = 2;
  CostMetric metric = CostMetric::Census;
  int p1 = 8;
  int p2 = 32;
  int paths = 8;
  float lr_tol = 1.0f;
  int speckle_max_size = 100;
  float speckle_diff = 1.0f;
  bool subpixel = true;
  /// Percentage margin by which the winning aggregated cost must beat every
  /// non-adjacent disparity; 0 disables the test.
  int uniqueness_ratio = 10;

  void validate() const;
  friend bool operator==(const MatchParams&, const MatchParams&) = default;
};

/// Defaults with the SGM penalties scaled for the chosen metric: census
/// Hamming costs use p1/p2 as given, SAD multiplies them by the window area.
MatchParams default_match_params(CostMetric metric = CostMetric::Census);

using CostValue = std::uint16_t;
inline constexpr CostValue kCostInvalid = std::numeric_limits<CostValue>::max();
/// Largest finite cost; saturating arithmetic clamps here so that finite
/// costs never collide with the invalid marker.
inline constexpr CostValue kCostMaxFinite = kCostInvalid - 1;

/// Row-major [y][x][d] cost tensor with d in [0, d_max].
class CostVolume {
 public:
  CostVolume() = default;
  CostVolume(int width, int height, int d_max, CostValue fill = 0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int d_max() const noexcept { return d_max_; }
  int levels() const noexcept { return d_max_ + 1; }

  CostValue& at(int x, int y, int d) { return data_[offset(x, y) + static_cast<std::size_t>(d)]; }
  CostValue at(int x, int y, int d) const { return data_[offset(x, y) + static_cast<std::size_t>(d)]; }

  CostValue* pixel(int x, int y) { return data_.data() + offset(x, y); }
  const CostValue* pixel(int x, int y) const { return data_.data() + offset(x, y); }

  std::vector<CostValue>& data() noexcept { return data_; }
  const std::vector<CostValue>& data() const noexcept { return data_; }

  friend bool operator==(const CostVolume&, const CostVolume&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
           static_cast<std::size_t>(levels());
  }

  int width_ = 0;
  int height_ = 0;
  int d_max_ = 0;
  std::vector<CostValue> data_;
};

using CensusImage = Grid<std::uint64_t, struct CensusTag>;

/// Bit k of a code is set iff the k-th window neighbor (row-major, center
/// skipped) is strictly darker than the center. Neighbors outside the image
/// contribute 0 bits. Radius is limited to 3 so a code fits in 64 bits.
CensusImage census_transform(const ImageGray& image, int window_radius);

/// SAD over the clipped window, or Hamming distance of census codes, between
/// left(x, y) and right(x - d, y). Out-of-frame correspondences get kCostInvalid.
CostVolume matching_cost(const ImageGray& left, const ImageGray& right, const MatchParams& params);

/// Sum of per-direction semi-global path costs over 4 or 8 directions.
/// Each path restarts at the image border with L = C; sums saturate at
/// kCostInvalid.
CostVolume sgm_aggregate(const CostVolume& cost, const MatchParams& params);

/// Winner-take-all readout, lowest disparity on ties, optional parabola
/// subpixel offset. A nonzero `uniqueness_ratio` rejects pixels where some
/// disparity more than one level away scores within that margin of the winner.
DisparityMap wta_disparity(const CostVolume& cost, bool subpixel, int uniqueness_ratio = 0);

/// Right-view cost obtained by re-indexing the left-view volume:
/// C_R(y, x, d) = C_L(y, x + d, d).
CostVolume mirror_cost_to_right(const CostVolume& cost);

/// Keeps d_L(x, y) iff x - round(d_L) is in frame and the right-view
/// disparity there agrees within `lr_tol`.
DisparityMap lr_consistency(const DisparityMap& left, const DisparityMap& right, float lr_tol);

/// 3x3 median over valid neighbors followed by speckle removal.
DisparityMap postprocess(const DisparityMap& disparity, const MatchParams& params);

/// Median filter stage of `postprocess`, exposed for testing.
DisparityMap median3x3(const DisparityMap& disparity);

/// Invalidates regions smaller than `max_size` pixels, where a region grows
/// across 4-neighbors whose disparities differ by at most `max_diff`.
DisparityMap remove_speckles(const DisparityMap& disparity, int max_size, float max_diff);

/// Local block matching: wta_disparity(matching_cost(...), params.subpixel).
DisparityMap block_match(const ImageGray& left, const ImageGray& right, const MatchParams& params);

/// Full semi-global pipeline: cost, aggregation, WTA for both views,
/// left-right check, postprocessing. Zero disparities are reported invalid.
DisparityMap sgbm(const ImageGray& left, const ImageGray& right, const MatchParams& params);

}  // namespace branchrange
