#pragma once

#include <algorithm>
#include <vector>

#include "branchrange/error.hpp"

namespace branchrange::detail {

// Median with the mean-of-middle-two convention for even lengths. Reorders
// `values`.
inline double median_inplace(std::vector<double>& values) {
  require(!values.empty(), ErrorKind::EmptyInput, "median of an empty set");
  const auto n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace branchrange::detail
