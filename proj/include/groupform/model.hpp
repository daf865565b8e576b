#pragma once

// Closed-form evaluation of the group-formation model: proportions, mutual
// attraction, cumulative attraction, attraction potential and entry
// probabilities. Everything here is a pure function of its arguments.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace groupform {

using Vector = std::vector<double>;
using Matrix = Eigen::MatrixXd;

/// Integer member counts n_k with their total N.
struct GroupCounts {
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  /// Validates K >= 2 and nonnegative entries, and computes the total.
  static GroupCounts from(std::vector<std::int64_t> counts);

  std::size_t size() const noexcept { return counts.size(); }
  void add_member(std::size_t group);
};

/// Proportion vector on the probability simplex.
struct SimplexState {
  Vector pi;

  std::size_t size() const noexcept { return pi.size(); }
  double operator[](std::size_t k) const { return pi[k]; }
};

enum class BiasMode { frozen, per_step };
enum class AttractionMode { full, reduced };

/// Additive group bias: either explicit values or truncated-normal draws.
struct BiasSpec {
  BiasMode mode = BiasMode::frozen;
  double mu = 0.1;
  double sigma = 0.05;
  std::optional<Vector> explicit_values;
};

struct ModelParams {
  double beta = 0.5;
  AttractionMode attraction_mode = AttractionMode::full;
  double theta_scalar = 1.0;  // reduced mode only
  BiasSpec bias;
  double smoothing = 1e-12;
  double floor = 1e-9;

  /// Throws ConfigError when a field violates its domain for K groups.
  void validate(std::size_t k_groups) const;
};

struct AttractionMatrix {
  Matrix m;
};

/// theta, potential and probability vectors produced for one state.
struct ChoiceEvaluation {
  Vector theta;
  Vector potential;
  Vector p;
};

SimplexState proportions(const GroupCounts& counts);
SimplexState proportions(std::span<const double> sizes);

/// Smoothed mutual attraction (x^2 + y^2 - xy) / (max(x, y) + smoothing).
double mutual_attraction(double x, double y, double smoothing);

AttractionMatrix attraction_matrix(const SimplexState& state, double smoothing);

/// Row sums of the attraction matrix, self term included.
Vector cumulative_attraction(const AttractionMatrix& matrix);

/// a_k = theta_k * max(pi_k, floor)^(-beta).
Vector attraction_potential(std::span<const double> theta, const SimplexState& state,
                            double beta, double floor);

/// p_k = (a_k + eps_k) / sum_j (a_j + eps_j).
Vector choice_probabilities(std::span<const double> potential, std::span<const double> eps);

/// Entry probabilities with a constant scalar theta in place of theta_k.
Vector reduced_choice_probabilities(const SimplexState& state, double theta, double beta,
                                    std::span<const double> eps, double floor);

/// Full pipeline for the configured attraction mode.
ChoiceEvaluation evaluate_choice(const SimplexState& state, const ModelParams& params,
                                 std::span<const double> eps);

/// Entry probabilities only; shorthand for evaluate_choice(...).p.
Vector choice_map(const SimplexState& state, const ModelParams& params,
                  std::span<const double> eps);

/// M(x, y) = x^2/y - x + y, the mutual attraction for x <= y without smoothing.
double reduced_attraction(double x, double y);

/// (dM/dx, dM/dy) of reduced_attraction.
std::array<double, 2> gradient_of_M(double x, double y);

/// Hessian of reduced_attraction; rank one, (2/y^3) (y, -x)(y, -x)^T.
Eigen::Matrix2d hessian_of_M(double x, double y);

}  // namespace groupform
