#pragma once

#include <vector>

#include "branchrange/core.hpp"

namespace branchrange {

/// Weighted-least-squares smoothing settings.
///
/// The refined map minimizes
///   E(u) = sum_p c_p (u_p - d_p)^2 + lambda * sum_{p~q} w_pq (u_p - u_q)^2
/// over 4-neighbor pairs, with c_p = 1 on valid input pixels and 0 elsewhere,
/// and w_pq = exp(-|g_p - g_q| / sigma_color) from the guide image g.
struct WlsParams {
  double lambda = 8000.0 / (255.0 * 255.0);
  double sigma_color = 8.0;
  int iterations = 60;
  bool fill_invalid = false;

  void validate() const;
  friend bool operator==(const WlsParams&, const WlsParams&) = default;
};

/// Each invalid pixel takes the smaller of the nearest valid disparities to
/// its left and right in the same row (or the only one that exists). Rows
/// without any valid pixel are left untouched.
DisparityMap fill_holes(const DisparityMap& disparity);

/// Runs `params.iterations` forward row-major Gauss-Seidel sweeps on the
/// normal equations of E(u). With `fill_invalid` the input first goes through
/// fill_holes and every pixel is reported; otherwise pixels that were invalid
/// stay invalid in the output.
DisparityMap wls_refine(const DisparityMap& disparity, const ImageGray& guide, const WlsParams& params);

/// Same solve, additionally returning E(u) before the first sweep and after
/// every sweep (size iterations + 1). Used to check monotone descent.
DisparityMap wls_refine_traced(const DisparityMap& disparity, const ImageGray& guide, const WlsParams& params,
                               std::vector<double>& energies);

/// Evaluates E(u) for a candidate solution `u` (entries at data-free pixels
/// are taken as given, whatever their value).
double wls_energy(const std::vector<double>& u, const DisparityMap& data, const ImageGray& guide,
                  const WlsParams& params);

}  // namespace branchrange
