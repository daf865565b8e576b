#include "groupform/concentration.hpp"

#include <algorithm>
#include <cmath>

#include "groupform/errors.hpp"

namespace groupform {

ConcentrationStats concentration_stats(std::span<const double> sizes) {
  if (sizes.empty()) throw NumericalError("empty_sizes", "concentration statistics need at least one group");
  double total = 0.0;
  for (double s : sizes) {
    if (!(s >= 0.0)) throw NumericalError("negative_size", "group sizes must be nonnegative");
    total += s;
  }
  if (!(total > 0.0)) throw NumericalError("empty_population", "group sizes sum to zero");

  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  const double n = static_cast<double>(sizes.size());

  double abs_diff = 0.0;
  for (double a : sizes) {
    for (double b : sizes) abs_diff += std::abs(a - b);
  }
  const double mean = total / n;

  ConcentrationStats stats;
  stats.max_min_ratio = *hi / std::max(*lo, 1.0);
  stats.max_share = *hi / total;
  stats.gini = abs_diff / (n * n) / (2.0 * mean);
  return stats;
}

}  // namespace groupform
