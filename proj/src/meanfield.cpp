#include "groupform/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "groupform/errors.hpp"

namespace groupform {

Vector analysis_bias(const ModelParams& params, std::size_t k_groups) {
  if (params.bias.explicit_values) return *params.bias.explicit_values;
  return Vector(k_groups, params.bias.mu);
}

Vector drift(const SimplexState& state, const ModelParams& params, std::span<const double> eps) {
  Vector f = choice_map(state, params, eps);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] -= state.pi[k];
  return f;
}

Renormalized renormalize(std::span<const double> values) {
  Vector pi(values.begin(), values.end());
  double total = 0.0;
  for (double& v : pi) {
    v = std::max(v, 0.0);
    total += v;
  }
  if (!(total > 0.0)) throw NumericalError("empty_population", "state has no positive mass");
  double correction = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    pi[k] /= total;
    correction = std::max(correction, std::abs(pi[k] - values[k]));
  }
  return Renormalized{SimplexState{std::move(pi)}, correction};
}

namespace {

Vector axpy(std::span<const double> x, double a, std::span<const double> y) {
  Vector out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] + a * y[k];
  return out;
}

void record_state(Trajectory& out, double t, const SimplexState& state, const ModelParams& params,
                  std::span<const double> eps) {
  ChoiceEvaluation eval = evaluate_choice(state, params, eps);
  out.times.push_back(t);
  out.pi_series.push_back(state.pi);
  out.theta_series.push_back(std::move(eval.theta));
  out.a_series.push_back(std::move(eval.potential));
  out.p_series.push_back(std::move(eval.p));
  out.chosen_series.push_back(std::nullopt);
}

}  // namespace

Trajectory integrate_ode(const SimplexState& state0, const ModelParams& params,
                         std::span<const double> eps, double dt, double t_end,
                         std::int64_t record_every) {
  if (!(dt > 0.0)) throw ConfigError("invalid_dt", "dt must be positive");
  if (!(t_end >= 0.0)) throw ConfigError("invalid_t_end", "t_end must be nonnegative");
  if (record_every < 1) throw ConfigError("invalid_record_every", "record_every must be at least 1");

  Trajectory out;
  out.process = ProcessKind::mean_field;
  out.frozen_bias.assign(eps.begin(), eps.end());

  const auto n_steps = static_cast<std::int64_t>(std::ceil(t_end / dt - 1e-9));
  SimplexState state = state0;
  record_state(out, 0.0, state, params, eps);

  for (std::int64_t i = 1; i <= n_steps; ++i) {
    const double t_prev = static_cast<double>(i - 1) * dt;
    const double t = i == n_steps ? t_end : static_cast<double>(i) * dt;
    const double h = t - t_prev;

    const Vector k1 = drift(state, params, eps);
    const Vector k2 = drift(SimplexState{axpy(state.pi, 0.5 * h, k1)}, params, eps);
    const Vector k3 = drift(SimplexState{axpy(state.pi, 0.5 * h, k2)}, params, eps);
    const Vector k4 = drift(SimplexState{axpy(state.pi, h, k3)}, params, eps);
    Vector raw(state.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
      raw[k] = state.pi[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
      if (!(raw[k] >= -10.0 * dt && raw[k] <= 1.0 + 10.0 * dt)) {
        std::ostringstream msg;
        msg << "ODE state left the admissible band at t = " << t << " (group " << k
            << ", value " << raw[k] << ")";
        throw NumericalError("ode_instability", msg.str());
      }
    }
    Renormalized next = renormalize(raw);
    out.max_renormalization = std::max(out.max_renormalization, next.correction);
    if (next.correction > 1e-6) {
      std::ostringstream msg;
      msg << "renormalization correction " << next.correction << " at t = " << t;
      out.warnings.push_back(msg.str());
    }
    state = std::move(next.state);
    if (i % record_every == 0 || i == n_steps) record_state(out, t, state, params, eps);
  }
  return out;
}

FixedPointResult solve_fixed_point(const ModelParams& params, std::span<const double> eps,
                                   const SimplexState& initial, const FixedPointOptions& options) {
  if (!(options.relax > 0.0 && options.relax <= 1.0)) {
    throw ConfigError("invalid_relax", "relaxation must lie in (0, 1]");
  }
  if (!(options.tol > 0.0)) throw ConfigError("invalid_tol", "tolerance must be positive");
  params.validate(initial.size());

  SimplexState pi = renormalize(initial.pi).state;
  FixedPointResult best{pi, std::numeric_limits<double>::infinity(), 0, false};

  for (std::int64_t iter = 0;; ++iter) {
    const Vector p = choice_map(pi, params, eps);
    double residual = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) residual = std::max(residual, std::abs(p[k] - pi.pi[k]));
    if (!std::isfinite(residual)) {
      throw NumericalError("fixed_point_nonfinite", "fixed-point residual became non-finite");
    }
    if (residual < best.residual_norm) best = FixedPointResult{pi, residual, iter, false};
    if (residual <= options.tol) {
      best.converged = true;
      return best;
    }
    if (iter >= options.max_iter) {
      best.iterations = iter;
      return best;
    }
    Vector next(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
      next[k] = (1.0 - options.relax) * pi.pi[k] + options.relax * p[k];
    }
    pi = renormalize(next).state;
  }
}

SimplexState first_order_equilibrium(const PerturbationInput& input) {
  const std::size_t k = input.k_groups;
  if (k < 2 || input.eta_perturb.size() != k) {
    throw ConfigError("eta_length", "eta_perturb must have one entry per group (K >= 2)");
  }
  const double eta_sum = std::accumulate(input.eta_perturb.begin(), input.eta_perturb.end(), 0.0);
  if (std::abs(eta_sum) > 1e-12) {
    throw ConfigError("eta_not_centered", "bias perturbations must sum to zero");
  }
  const double kd = static_cast<double>(k);
  const double denom = input.theta * std::pow(kd, input.beta + 1.0) * (1.0 + input.beta) +
                       kd * input.eps_base;
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw NumericalError("degenerate_expansion",
                         "first-order denominator theta (1 + beta) K^(beta+1) + K eps must be positive");
  }
  SimplexState out{Vector(k)};
  for (std::size_t j = 0; j < k; ++j) out.pi[j] = 1.0 / kd + input.eta_perturb[j] / denom;
  return out;
}

ModelParams perturbation_params(const PerturbationInput& input) {
  ModelParams params;
  params.attraction_mode = AttractionMode::reduced;
  params.theta_scalar = input.theta;
  params.beta = input.beta;
  params.bias.explicit_values = perturbation_bias(input);
  return params;
}

Vector perturbation_bias(const PerturbationInput& input) {
  Vector eps(input.eta_perturb.size());
  for (std::size_t k = 0; k < eps.size(); ++k) eps[k] = input.eps_base + input.eta_perturb[k];
  return eps;
}

}  // namespace groupform
