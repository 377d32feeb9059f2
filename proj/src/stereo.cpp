#include "branchrange/stereo.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <string>

#include "median.hpp"

namespace branchrange {

namespace {

constexpr CostValue saturate_cost(std::uint64_t v) {
  return v > kCostMaxFinite ? kCostMaxFinite : static_cast<CostValue>(v);
}

struct Direction {
  int dx;
  int dy;
};

constexpr std::array<Direction, 8> kDirections{{
    {1, 0}, {-1, 0}, {0, 1}, {0, -1},  // 4-path set
    {1, 1}, {-1, 1}, {1, -1}, {-1, -1},
}};

// One step of the path recursion for pixel p given the path cost vector of
// its predecessor. `prev_min` is min_k prev[k].
inline void sgm_step(const CostValue* cost, const std::int32_t* prev, std::int32_t prev_min, int levels, int p1,
                     int p2, std::int32_t* out, std::int32_t& out_min) {
  std::int32_t best = std::numeric_limits<std::int32_t>::max();
  const std::int32_t jump = prev_min + p2;
  for (int d = 0; d < levels; ++d) {
    std::int32_t m = prev[d];
    if (d > 0) m = std::min(m, prev[d - 1] + p1);
    if (d + 1 < levels) m = std::min(m, prev[d + 1] + p1);
    m = std::min(m, jump);
    const std::int32_t v = static_cast<std::int32_t>(cost[d]) + m - prev_min;
    out[d] = v;
    best = std::min(best, v);
  }
  out_min = best;
}

inline void start_path(const CostValue* cost, int levels, std::int32_t* out, std::int32_t& out_min) {
  std::int32_t best = std::numeric_limits<std::int32_t>::max();
  for (int d = 0; d < levels; ++d) {
    out[d] = cost[d];
    best = std::min(best, out[d]);
  }
  out_min = best;
}

inline void accumulate(std::uint32_t* sum, const std::int32_t* path, int levels) {
  for (int d = 0; d < levels; ++d) sum[d] += static_cast<std::uint32_t>(path[d]);
}

// Horizontal paths: rows are independent.
void aggregate_horizontal(const CostVolume& cost, int dx, int p1, int p2, std::vector<std::uint32_t>& sum) {
  const int w = cost.width();
  const int h = cost.height();
  const int levels = cost.levels();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    std::vector<std::int32_t> prev(static_cast<std::size_t>(levels));
    std::vector<std::int32_t> cur(static_cast<std::size_t>(levels));
    std::int32_t prev_min = 0;
    std::int32_t cur_min = 0;
    for (int i = 0; i < w; ++i) {
      const int x = dx > 0 ? i : w - 1 - i;
      const CostValue* c = cost.pixel(x, y);
      if (i == 0) {
        start_path(c, levels, cur.data(), cur_min);
      } else {
        sgm_step(c, prev.data(), prev_min, levels, p1, p2, cur.data(), cur_min);
      }
      const std::size_t base = (static_cast<std::size_t>(y) * w + x) * levels;
      accumulate(sum.data() + base, cur.data(), levels);
      std::swap(prev, cur);
      prev_min = cur_min;
    }
  }
}

// Paths with a vertical component: scan rows in path order; pixels within a
// row depend only on the previous row and are independent of each other.
void aggregate_vertical(const CostVolume& cost, int dx, int dy, int p1, int p2, std::vector<std::uint32_t>& sum) {
  const int w = cost.width();
  const int h = cost.height();
  const int levels = cost.levels();
  const std::size_t row_len = static_cast<std::size_t>(w) * levels;
  std::vector<std::int32_t> prev(row_len);
  std::vector<std::int32_t> cur(row_len);
  std::vector<std::int32_t> prev_min(static_cast<std::size_t>(w));
  std::vector<std::int32_t> cur_min(static_cast<std::size_t>(w));
  for (int i = 0; i < h; ++i) {
    const int y = dy > 0 ? i : h - 1 - i;
#pragma omp parallel for schedule(static)
    for (int x = 0; x < w; ++x) {
      const CostValue* c = cost.pixel(x, y);
      std::int32_t* out = cur.data() + static_cast<std::size_t>(x) * levels;
      const int px = x - dx;
      if (i == 0 || px < 0 || px >= w) {
        start_path(c, levels, out, cur_min[x]);
      } else {
        sgm_step(c, prev.data() + static_cast<std::size_t>(px) * levels, prev_min[px], levels, p1, p2, out,
                 cur_min[x]);
      }
      accumulate(sum.data() + (static_cast<std::size_t>(y) * w + x) * levels, out, levels);
    }
    std::swap(prev, cur);
    std::swap(prev_min, cur_min);
  }
}

}  // namespace

void MatchParams::validate() const {
  require(d_max >= 1, ErrorKind::InvalidParams, "d_max must be >= 1");
  require(d_max < 4096, ErrorKind::InvalidParams, "d_max must be < 4096");
  require(window_radius >= 1, ErrorKind::InvalidParams, "window_radius must be >= 1");
  require(p1 >= 0 && p1 <= p2, ErrorKind::InvalidParams, "penalties must satisfy 0 <= p1 <= p2");
  require(p2 <= 32767, ErrorKind::InvalidParams, "p2 too large");
  require(paths == 4 || paths == 8, ErrorKind::InvalidParams, "paths must be 4 or 8");
  require(lr_tol >= 0.0f, ErrorKind::InvalidParams, "lr_tol must be >= 0");
  require(speckle_max_size >= 0, ErrorKind::InvalidParams, "speckle_max_size must be >= 0");
  require(speckle_diff >= 0.0f, ErrorKind::InvalidParams, "speckle_diff must be >= 0");
  require(uniqueness_ratio >= 0 && uniqueness_ratio < 100, ErrorKind::InvalidParams,
          "uniqueness_ratio must be in [0, 100)");
  if (metric == CostMetric::Census) {
    require(window_radius <= 3, ErrorKind::InvalidParams, "census window_radius must be <= 3 (64-bit codes)");
  }
}

MatchParams default_match_params(CostMetric metric) {
  MatchParams params;
  params.metric = metric;
  if (metric == CostMetric::SAD) {
    const int area = (2 * params.window_radius + 1) * (2 * params.window_radius + 1);
    params.p1 *= area;
    params.p2 *= area;
  }
  return params;
}

CostVolume::CostVolume(int width, int height, int d_max, CostValue fill)
    : width_(width), height_(height), d_max_(d_max) {
  require(width >= 0 && height >= 0 && d_max >= 0, ErrorKind::InvalidParams, "bad cost volume shape");
  data_.assign(static_cast<std::size_t>(width) * height * (d_max + 1), fill);
}

CensusImage census_transform(const ImageGray& image, int window_radius) {
  require(window_radius >= 1, ErrorKind::InvalidParams, "census window_radius must be >= 1");
  require(window_radius <= 3, ErrorKind::InvalidParams, "census window_radius must be <= 3 (64-bit codes)");
  const int side = 2 * window_radius + 1;
  require(side <= std::min(image.width(), image.height()), ErrorKind::WindowTooLarge,
          "census window " + std::to_string(side) + " does not fit the image");
  const int w = image.width();
  const int h = image.height();
  CensusImage codes(w, h, 0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t center = image.at(x, y);
      std::uint64_t code = 0;
      int bit = 0;
      for (int j = -window_radius; j <= window_radius; ++j) {
        for (int i = -window_radius; i <= window_radius; ++i) {
          if (i == 0 && j == 0) continue;
          const int nx = x + i;
          const int ny = y + j;
          if (image.contains(nx, ny) && image.at(nx, ny) < center) code |= std::uint64_t{1} << bit;
          ++bit;
        }
      }
      codes.at(x, y) = code;
    }
  }
  return codes;
}

CostVolume matching_cost(const ImageGray& left, const ImageGray& right, const MatchParams& params) {
  params.validate();
  require(left.same_shape(right), ErrorKind::DimensionMismatch, "left and right images differ in size");
  const int w = left.width();
  const int h = left.height();
  const int r = params.window_radius;
  CostVolume cost(w, h, params.d_max, kCostInvalid);

  if (params.metric == CostMetric::Census) {
    const CensusImage cl = census_transform(left, r);
    const CensusImage cr = census_transform(right, r);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        CostValue* c = cost.pixel(x, y);
        const std::uint64_t code = cl.at(x, y);
        const int top = std::min(params.d_max, x);
        for (int d = 0; d <= top; ++d) {
          c[d] = static_cast<CostValue>(std::popcount(code ^ cr.at(x - d, y)));
        }
      }
    }
    return cost;
  }

  require(2 * r + 1 <= std::min(w, h), ErrorKind::WindowTooLarge, "SAD window does not fit the image");
  // Per disparity: absolute differences (zero where the right sample is out
  // of frame) then clipped box sums through a summed-area table.
  const std::size_t stride = static_cast<std::size_t>(w) + 1;
#pragma omp parallel for schedule(static)
  for (int d = 0; d <= params.d_max; ++d) {
    if (d >= w) continue;
    std::vector<std::uint64_t> sat(stride * (static_cast<std::size_t>(h) + 1), 0);
    for (int y = 0; y < h; ++y) {
      std::uint64_t run = 0;
      for (int x = 0; x < w; ++x) {
        if (x >= d) run += static_cast<std::uint64_t>(std::abs(int{left.at(x, y)} - int{right.at(x - d, y)}));
        sat[(y + 1) * stride + (x + 1)] = sat[y * stride + (x + 1)] + run;
      }
    }
    for (int y = 0; y < h; ++y) {
      const int y0 = std::max(0, y - r);
      const int y1 = std::min(h - 1, y + r);
      for (int x = d; x < w; ++x) {
        const int x0 = std::max(0, x - r);
        const int x1 = std::min(w - 1, x + r);
        const std::uint64_t s = sat[(y1 + 1) * stride + (x1 + 1)] - sat[y0 * stride + (x1 + 1)] -
                                sat[(y1 + 1) * stride + x0] + sat[y0 * stride + x0];
        cost.at(x, y, d) = saturate_cost(s);
      }
    }
  }
  return cost;
}

CostVolume sgm_aggregate(const CostVolume& cost, const MatchParams& params) {
  params.validate();
  const int w = cost.width();
  const int h = cost.height();
  std::vector<std::uint32_t> sum(cost.data().size(), 0);
  for (int k = 0; k < params.paths; ++k) {
    const Direction dir = kDirections[static_cast<std::size_t>(k)];
    if (dir.dy == 0) {
      aggregate_horizontal(cost, dir.dx, params.p1, params.p2, sum);
    } else {
      aggregate_vertical(cost, dir.dx, dir.dy, params.p1, params.p2, sum);
    }
  }
  CostVolume out(w, h, cost.d_max());
  const auto& raw = cost.data();
  auto& dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = raw[i] == kCostInvalid ? kCostInvalid : saturate_cost(sum[i]);
  }
  return out;
}

DisparityMap wta_disparity(const CostVolume& cost, bool subpixel, int uniqueness_ratio) {
  require(uniqueness_ratio >= 0 && uniqueness_ratio < 100, ErrorKind::InvalidParams,
          "uniqueness_ratio must be in [0, 100)");
  const int w = cost.width();
  const int h = cost.height();
  const int d_max = cost.d_max();
  DisparityMap disp(w, h, kInvalidDisparity);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const CostValue* c = cost.pixel(x, y);
      int best = 0;
      for (int d = 1; d <= d_max; ++d) {
        if (c[d] < c[best]) best = d;
      }
      const CostValue best_cost = c[best];
      if (best_cost == kCostInvalid) continue;

      if (uniqueness_ratio > 0) {
        bool ambiguous = false;
        for (int d = 0; d <= d_max && !ambiguous; ++d) {
          if (std::abs(d - best) <= 1 || c[d] == kCostInvalid) continue;
          ambiguous = std::uint64_t{c[d]} * (100 - uniqueness_ratio) <= std::uint64_t{best_cost} * 100;
        }
        if (ambiguous) continue;
      }

      float value = static_cast<float>(best);
      if (subpixel && best > 0 && best < d_max && c[best - 1] != kCostInvalid && c[best + 1] != kCostInvalid) {
        const double cm = c[best - 1];
        const double c0 = best_cost;
        const double cp = c[best + 1];
        const double denom = 2.0 * (cm - 2.0 * c0 + cp);
        if (denom > 0.0) {
          const float base = value;
          value = static_cast<float>(best + (cm - cp) / denom);
          // Clamp in float so rounding cannot land on a half-pixel boundary.
          value = std::clamp(value, std::nextafter(base - 0.5f, base), std::nextafter(base + 0.5f, base));
        }
      }
      disp.at(x, y) = value;
    }
  }
  return disp;
}

CostVolume mirror_cost_to_right(const CostVolume& cost) {
  const int w = cost.width();
  const int h = cost.height();
  const int d_max = cost.d_max();
  CostVolume out(w, h, d_max, kCostInvalid);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      CostValue* dst = out.pixel(x, y);
      for (int d = 0; d <= d_max && x + d < w; ++d) dst[d] = cost.at(x + d, y, d);
    }
  }
  return out;
}

DisparityMap lr_consistency(const DisparityMap& left, const DisparityMap& right, float lr_tol) {
  require(left.same_shape(right), ErrorKind::DimensionMismatch, "left and right disparity maps differ in size");
  require(lr_tol >= 0.0f, ErrorKind::InvalidParams, "lr_tol must be >= 0");
  DisparityMap out(left.width(), left.height(), kInvalidDisparity);
  for (int y = 0; y < left.height(); ++y) {
    for (int x = 0; x < left.width(); ++x) {
      const float dl = left.at(x, y);
      if (!is_valid_disparity(dl)) continue;
      const long xr = x - std::lround(dl);
      if (xr < 0 || xr >= left.width()) continue;
      const float dr = right.at(static_cast<int>(xr), y);
      if (!is_valid_disparity(dr)) continue;
      if (std::fabs(dl - dr) <= lr_tol) out.at(x, y) = dl;
    }
  }
  return out;
}

DisparityMap median3x3(const DisparityMap& disparity) {
  const int w = disparity.width();
  const int h = disparity.height();
  DisparityMap out(w, h, kInvalidDisparity);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    std::vector<double> window;
    window.reserve(9);
    for (int x = 0; x < w; ++x) {
      if (!is_valid_disparity(disparity.at(x, y))) continue;
      window.clear();
      for (int j = -1; j <= 1; ++j) {
        for (int i = -1; i <= 1; ++i) {
          if (!disparity.contains(x + i, y + j)) continue;
          const float v = disparity.at(x + i, y + j);
          if (is_valid_disparity(v)) window.push_back(v);
        }
      }
      out.at(x, y) = static_cast<float>(detail::median_inplace(window));
    }
  }
  return out;
}

DisparityMap remove_speckles(const DisparityMap& disparity, int max_size, float max_diff) {
  DisparityMap out = disparity;
  if (max_size <= 0) return out;
  const int w = disparity.width();
  const int h = disparity.height();
  std::vector<std::uint8_t> visited(disparity.size(), 0);
  std::vector<int> component;
  std::deque<int> queue;
  constexpr std::array<std::array<int, 2>, 4> kNeighbors{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  for (int start = 0; start < w * h; ++start) {
    if (visited[start] || !is_valid_disparity(disparity.data()[start])) continue;
    component.clear();
    queue.assign(1, start);
    visited[start] = 1;
    while (!queue.empty()) {
      const int idx = queue.front();
      queue.pop_front();
      component.push_back(idx);
      const int x = idx % w;
      const int y = idx / w;
      const float v = disparity.data()[idx];
      for (const auto& [ox, oy] : kNeighbors) {
        const int nx = x + ox;
        const int ny = y + oy;
        if (!disparity.contains(nx, ny)) continue;
        const int nidx = ny * w + nx;
        if (visited[nidx]) continue;
        const float nv = disparity.data()[nidx];
        if (!is_valid_disparity(nv) || std::fabs(nv - v) > max_diff) continue;
        visited[nidx] = 1;
        queue.push_back(nidx);
      }
    }
    if (static_cast<int>(component.size()) < max_size) {
      for (int idx : component) out.data()[idx] = kInvalidDisparity;
    }
  }
  return out;
}

DisparityMap postprocess(const DisparityMap& disparity, const MatchParams& params) {
  return remove_speckles(median3x3(disparity), params.speckle_max_size, params.speckle_diff);
}

DisparityMap block_match(const ImageGray& left, const ImageGray& right, const MatchParams& params) {
  return wta_disparity(matching_cost(left, right, params), params.subpixel);
}

DisparityMap sgbm(const ImageGray& left, const ImageGray& right, const MatchParams& params) {
  const CostVolume aggregated = sgm_aggregate(matching_cost(left, right, params), params);
  DisparityMap left_disp = wta_disparity(aggregated, params.subpixel, params.uniqueness_ratio);
  for (float& d : left_disp.data()) {
    if (d <= 0.0f) d = kInvalidDisparity;
  }
  const DisparityMap right_disp = wta_disparity(mirror_cost_to_right(aggregated), params.subpixel);
  return postprocess(lr_consistency(left_disp, right_disp, params.lr_tol), params);
}

}  // namespace branchrange
