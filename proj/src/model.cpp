#include "groupform/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "groupform/errors.hpp"

namespace groupform {

GroupCounts GroupCounts::from(std::vector<std::int64_t> counts) {
  if (counts.size() < 2) {
    throw ConfigError("too_few_groups", "at least two groups are required");
  }
  std::int64_t total = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 0) {
      throw ConfigError("negative_count", "group " + std::to_string(k) + " has a negative count");
    }
    total += counts[k];
  }
  return GroupCounts{std::move(counts), total};
}

void GroupCounts::add_member(std::size_t group) {
  ++counts.at(group);
  ++total;
}

void ModelParams::validate(std::size_t k_groups) const {
  if (k_groups < 2) throw ConfigError("too_few_groups", "at least two groups are required");
  if (!std::isfinite(beta)) throw ConfigError("invalid_beta", "beta must be finite");
  if (!(smoothing > 0.0)) throw ConfigError("invalid_smoothing", "smoothing must be positive");
  if (!(floor > 0.0)) throw ConfigError("invalid_floor", "floor must be positive");
  if (attraction_mode == AttractionMode::reduced && !(theta_scalar > 0.0)) {
    throw ConfigError("invalid_theta", "theta_scalar must be positive in reduced mode");
  }
  if (!(bias.sigma >= 0.0)) throw ConfigError("invalid_sigma", "bias sigma must be nonnegative");
  if (bias.explicit_values) {
    const auto& values = *bias.explicit_values;
    if (values.size() != k_groups) {
      throw ConfigError("bias_length", "explicit bias has " + std::to_string(values.size()) +
                                           " entries, expected " + std::to_string(k_groups));
    }
    for (double v : values) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError("negative_bias", "explicit bias values must be finite and nonnegative");
      }
    }
  } else if (bias.sigma == 0.0 && bias.mu < 0.0) {
    throw ConfigError("empty_bias_support", "sigma = 0 with negative mu has no nonnegative support");
  }
}

SimplexState proportions(const GroupCounts& counts) {
  if (counts.total <= 0) {
    throw NumericalError("empty_population", "cannot form proportions of an empty population");
  }
  SimplexState state{Vector(counts.size())};
  const double total = static_cast<double>(counts.total);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    state.pi[k] = static_cast<double>(counts.counts[k]) / total;
  }
  return state;
}

SimplexState proportions(std::span<const double> sizes) {
  const double total = std::accumulate(sizes.begin(), sizes.end(), 0.0);
  if (!(total > 0.0)) {
    throw NumericalError("empty_population", "cannot form proportions of an empty population");
  }
  SimplexState state{Vector(sizes.begin(), sizes.end())};
  for (double& v : state.pi) v /= total;
  return state;
}

double mutual_attraction(double x, double y, double smoothing) {
  return (x * x + y * y - x * y) / (std::max(x, y) + smoothing);
}

AttractionMatrix attraction_matrix(const SimplexState& state, double smoothing) {
  const auto k = static_cast<Eigen::Index>(state.size());
  Matrix m(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    m(i, i) = mutual_attraction(state.pi[i], state.pi[i], smoothing);
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double v = mutual_attraction(state.pi[i], state.pi[j], smoothing);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return AttractionMatrix{std::move(m)};
}

Vector cumulative_attraction(const AttractionMatrix& matrix) {
  Vector theta(static_cast<std::size_t>(matrix.m.rows()));
  for (Eigen::Index i = 0; i < matrix.m.rows(); ++i) {
    // Explicit left-to-right sum so results do not depend on Eigen's
    // vectorized reduction order.
    double s = 0.0;
    for (Eigen::Index j = 0; j < matrix.m.cols(); ++j) s += matrix.m(i, j);
    theta[static_cast<std::size_t>(i)] = s;
  }
  return theta;
}

Vector attraction_potential(std::span<const double> theta, const SimplexState& state,
                            double beta, double floor) {
  Vector a(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    a[k] = beta == 0.0 ? theta[k] : theta[k] * std::pow(std::max(state.pi[k], floor), -beta);
  }
  return a;
}

Vector choice_probabilities(std::span<const double> potential, std::span<const double> eps) {
  if (potential.size() != eps.size()) {
    throw NumericalError("size_mismatch", "potential and bias vectors differ in length");
  }
  Vector p(potential.size());
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = potential[k] + eps[k];
    total += p[k];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("degenerate_attraction",
                         "attraction plus bias sums to a non-positive or non-finite value");
  }
  for (double& v : p) v /= total;
  return p;
}

Vector reduced_choice_probabilities(const SimplexState& state, double theta, double beta,
                                    std::span<const double> eps, double floor) {
  const Vector thetas(state.size(), theta);
  return choice_probabilities(attraction_potential(thetas, state, beta, floor), eps);
}

ChoiceEvaluation evaluate_choice(const SimplexState& state, const ModelParams& params,
                                 std::span<const double> eps) {
  ChoiceEvaluation out;
  if (params.attraction_mode == AttractionMode::full) {
    out.theta = cumulative_attraction(attraction_matrix(state, params.smoothing));
  } else {
    out.theta.assign(state.size(), params.theta_scalar);
  }
  out.potential = attraction_potential(out.theta, state, params.beta, params.floor);
  out.p = choice_probabilities(out.potential, eps);
  return out;
}

Vector choice_map(const SimplexState& state, const ModelParams& params,
                  std::span<const double> eps) {
  return evaluate_choice(state, params, eps).p;
}

namespace {

void require_positive_y(double y) {
  if (!(y > 0.0)) {
    throw NumericalError("domain_error", "M(x, y) derivatives require y > 0");
  }
}

}  // namespace

double reduced_attraction(double x, double y) {
  require_positive_y(y);
  return x * x / y - x + y;
}

std::array<double, 2> gradient_of_M(double x, double y) {
  require_positive_y(y);
  const double r = x / y;
  return {2.0 * r - 1.0, 1.0 - r * r};
}

Eigen::Matrix2d hessian_of_M(double x, double y) {
  require_positive_y(y);
  const double y2 = y * y;
  Eigen::Matrix2d h;
  h(0, 0) = 2.0 / y;
  h(0, 1) = -2.0 * x / y2;
  h(1, 0) = h(0, 1);
  h(1, 1) = 2.0 * x * x / (y2 * y);
  return h;
}

}  // namespace groupform
