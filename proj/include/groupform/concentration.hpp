#pragma once

#include <span>

namespace groupform {

struct ConcentrationStats {
  double max_min_ratio = 1.0;  // min floored at 1
  double max_share = 0.0;
  double gini = 0.0;
};

/// Inequality summary of final group sizes. Gini is the mean absolute
/// difference over all ordered pairs divided by twice the mean.
ConcentrationStats concentration_stats(std::span<const double> sizes);

}  // namespace groupform
