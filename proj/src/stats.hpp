#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace lowrank::detail {

/// Median of the values; NaN for an empty list.
inline double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace lowrank::detail
