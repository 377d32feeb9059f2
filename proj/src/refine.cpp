#include "branchrange/refine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace branchrange {

namespace {

struct GuideWeights {
  // right[i]: weight between pixel i and its right neighbor; down[i]: below.
  std::vector<double> right;
  std::vector<double> down;
};

GuideWeights guide_weights(const ImageGray& guide, double sigma_color) {
  const int w = guide.width();
  const int h = guide.height();
  GuideWeights gw{std::vector<double>(guide.size(), 0.0), std::vector<double>(guide.size(), 0.0)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const int g = guide.at(x, y);
      if (x + 1 < w) gw.right[i] = std::exp(-std::abs(g - int{guide.at(x + 1, y)}) / sigma_color);
      if (y + 1 < h) gw.down[i] = std::exp(-std::abs(g - int{guide.at(x, y + 1)}) / sigma_color);
    }
  }
  return gw;
}

DisparityMap solve(const DisparityMap& input, const ImageGray& guide, const WlsParams& params,
                   std::vector<double>* energies) {
  params.validate();
  require(input.same_shape(guide), ErrorKind::DimensionMismatch, "disparity and guide differ in size");
  const DisparityMap data = params.fill_invalid ? fill_holes(input) : input;
  const int w = data.width();
  const int h = data.height();
  const std::size_t n = data.size();

  double valid_sum = 0.0;
  std::size_t valid_count = 0;
  for (float v : data.data()) {
    if (is_valid_disparity(v)) {
      valid_sum += v;
      ++valid_count;
    }
  }
  if (valid_count == 0) {
    if (energies) energies->assign(static_cast<std::size_t>(params.iterations) + 1, 0.0);
    return data;
  }

  // Data-free pixels start at the mean so every iterate stays inside the
  // range of the valid data.
  const double seed = valid_sum / static_cast<double>(valid_count);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = is_valid_disparity(data.data()[i]) ? static_cast<double>(data.data()[i]) : seed;
  }

  const GuideWeights gw = guide_weights(guide, params.sigma_color);
  const double lambda = params.lambda;
  if (energies) {
    energies->clear();
    energies->push_back(wls_energy(u, data, guide, params));
  }
  for (int it = 0; it < params.iterations; ++it) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        const float dv = data.data()[i];
        const bool has_data = is_valid_disparity(dv);
        double num = has_data ? static_cast<double>(dv) : 0.0;
        double den = has_data ? 1.0 : 0.0;
        if (x + 1 < w) {
          num += lambda * gw.right[i] * u[i + 1];
          den += lambda * gw.right[i];
        }
        if (x > 0) {
          num += lambda * gw.right[i - 1] * u[i - 1];
          den += lambda * gw.right[i - 1];
        }
        if (y + 1 < h) {
          num += lambda * gw.down[i] * u[i + w];
          den += lambda * gw.down[i];
        }
        if (y > 0) {
          num += lambda * gw.down[i - w] * u[i - w];
          den += lambda * gw.down[i - w];
        }
        if (den > 0.0) u[i] = num / den;
      }
    }
    if (energies) energies->push_back(wls_energy(u, data, guide, params));
  }

  DisparityMap out(w, h, kInvalidDisparity);
  for (std::size_t i = 0; i < n; ++i) {
    if (params.fill_invalid || is_valid_disparity(data.data()[i])) out.data()[i] = static_cast<float>(u[i]);
  }
  return out;
}

}  // namespace

void WlsParams::validate() const {
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::InvalidParams, "lambda must be >= 0");
  require(std::isfinite(sigma_color) && sigma_color > 0.0, ErrorKind::InvalidParams, "sigma_color must be > 0");
  require(iterations >= 1, ErrorKind::InvalidParams, "iterations must be >= 1");
}

DisparityMap fill_holes(const DisparityMap& disparity) {
  DisparityMap out = disparity;
  const int w = disparity.width();
  std::vector<float> left_seen(static_cast<std::size_t>(w));
  for (int y = 0; y < disparity.height(); ++y) {
    auto src = disparity.row(y);
    auto dst = out.row(y);
    float last = kInvalidDisparity;
    for (int x = 0; x < w; ++x) {
      if (is_valid_disparity(src[x])) last = src[x];
      left_seen[x] = last;
    }
    last = kInvalidDisparity;
    for (int x = w - 1; x >= 0; --x) {
      if (is_valid_disparity(src[x])) {
        last = src[x];
        continue;
      }
      const float l = left_seen[x];
      const float r = last;
      if (is_valid_disparity(l) && is_valid_disparity(r)) {
        dst[x] = std::min(l, r);
      } else if (is_valid_disparity(l)) {
        dst[x] = l;
      } else if (is_valid_disparity(r)) {
        dst[x] = r;
      }
    }
  }
  return out;
}

DisparityMap wls_refine(const DisparityMap& disparity, const ImageGray& guide, const WlsParams& params) {
  return solve(disparity, guide, params, nullptr);
}

DisparityMap wls_refine_traced(const DisparityMap& disparity, const ImageGray& guide, const WlsParams& params,
                               std::vector<double>& energies) {
  return solve(disparity, guide, params, &energies);
}

double wls_energy(const std::vector<double>& u, const DisparityMap& data, const ImageGray& guide,
                  const WlsParams& params) {
  require(data.same_shape(guide) && u.size() == data.size(), ErrorKind::DimensionMismatch,
          "energy inputs differ in size");
  const int w = data.width();
  const int h = data.height();
  double energy = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const float dv = data.data()[i];
      if (is_valid_disparity(dv)) energy += (u[i] - dv) * (u[i] - dv);
      const int g = guide.at(x, y);
      if (x + 1 < w) {
        const double wt = std::exp(-std::abs(g - int{guide.at(x + 1, y)}) / params.sigma_color);
        energy += params.lambda * wt * (u[i] - u[i + 1]) * (u[i] - u[i + 1]);
      }
      if (y + 1 < h) {
        const double wt = std::exp(-std::abs(g - int{guide.at(x, y + 1)}) / params.sigma_color);
        energy += params.lambda * wt * (u[i] - u[i + w]) * (u[i] - u[i + w]);
      }
    }
  }
  return energy;
}

}  // namespace branchrange
