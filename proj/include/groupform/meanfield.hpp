#pragma once

// Deterministic analysis of the limiting dynamics d(pi)/dt = p(pi) - pi.

#include <cstdint>
#include <span>

#include "groupform/model.hpp"
#include "groupform/sim.hpp"

namespace groupform {

/// Constant bias vector for deterministic analysis: the explicit values when
/// configured, otherwise mu for every group.
Vector analysis_bias(const ModelParams& params, std::size_t k_groups);

/// f_k = p_k(pi) - pi_k.
Vector drift(const SimplexState& state, const ModelParams& params, std::span<const double> eps);

struct Renormalized {
  SimplexState state;
  double correction = 0.0;  // max |change| made by clamping and rescaling
};

/// Clamps negatives to zero and rescales onto the simplex.
Renormalized renormalize(std::span<const double> values);

/// Fixed-step classical RK4 from `state0` to `t_end`, renormalizing after
/// every step. Records every `record_every` steps plus the final time;
/// renormalization corrections above 1e-6 are logged in `warnings`.
/// Throws NumericalError("ode_instability") if a raw step leaves
/// [-10 dt, 1 + 10 dt].
Trajectory integrate_ode(const SimplexState& state0, const ModelParams& params,
                         std::span<const double> eps, double dt, double t_end,
                         std::int64_t record_every = 1);

struct FixedPointResult {
  SimplexState pi_star;
  double residual_norm = 0.0;  // max_k |p_k(pi*) - pi*_k|
  std::int64_t iterations = 0;
  bool converged = false;
};

struct FixedPointOptions {
  double relax = 0.5;
  double tol = 1e-12;
  std::int64_t max_iter = 100000;
};

/// Damped self-map iteration pi <- normalize((1 - relax) pi + relax p(pi)).
/// On non-convergence returns the lowest-residual iterate with
/// converged = false.
FixedPointResult solve_fixed_point(const ModelParams& params, std::span<const double> eps,
                                   const SimplexState& initial, const FixedPointOptions& options = {});

struct PerturbationInput {
  double theta = 1.0;
  double beta = 1.0;
  double eps_base = 1.0;
  Vector eta_perturb;  // must sum to zero
  std::size_t k_groups = 0;
};

/// pi_k = 1/K + eta_k / (theta K^(beta+1) (1 + beta) + K eps), the linear
/// response of the reduced model's symmetric equilibrium to bias offsets.
SimplexState first_order_equilibrium(const PerturbationInput& input);

/// Reduced-model parameters matching a perturbation input.
ModelParams perturbation_params(const PerturbationInput& input);

/// eps_base + eta_k per group.
Vector perturbation_bias(const PerturbationInput& input);

}  // namespace groupform
