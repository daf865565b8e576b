#include "groupform/sim.hpp"

#include <cmath>
#include <numeric>

#include "groupform/errors.hpp"
#include "groupform/parallel.hpp"

namespace groupform {

void SimConfig::validate() const {
  params.validate(k_groups);
  if (t_steps < 0) throw ConfigError("invalid_t_steps", "t_steps must be nonnegative");
  if (init_counts) {
    if (init_counts->size() != k_groups) {
      throw ConfigError("init_length", "explicit init has " + std::to_string(init_counts->size()) +
                                           " entries, expected " + std::to_string(k_groups));
    }
    double total = 0.0;
    for (double v : *init_counts) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError("negative_init", "initial sizes must be finite and nonnegative");
      }
      if (process == ProcessKind::entrant && v != std::floor(v)) {
        throw ConfigError("fractional_init", "entrant process needs integer initial counts");
      }
      total += v;
    }
    if (!(total > 0.0)) throw ConfigError("empty_init", "initial population must be positive");
  } else if (init_lo < 1 || init_hi < init_lo) {
    throw ConfigError("invalid_init_range", "initial range needs 1 <= lo <= hi");
  }
  if (process == ProcessKind::redistribution) {
    if (!(eta_frac > 0.0 && eta_frac < 1.0)) {
      throw ConfigError("invalid_eta", "eta_frac must lie in (0, 1)");
    }
    if (!(damping > 0.0 && damping <= 1.0)) {
      throw ConfigError("invalid_damping", "damping must lie in (0, 1]");
    }
  }
  if (record_every && *record_every < 1) {
    throw ConfigError("invalid_record_every", "record_every must be at least 1");
  }
}

std::int64_t SimConfig::resolved_record_every() const {
  if (record_every) return *record_every;
  constexpr std::int64_t limit = 10000;
  return t_steps <= limit ? 1 : (t_steps + limit - 1) / limit;
}

namespace {

ChoiceEvaluation evaluate_counts(const GroupCounts& counts, const ModelParams& params,
                                 const std::optional<Vector>& eps_frozen, Rng& rng) {
  const SimplexState state = proportions(counts);
  const Vector eps = eps_frozen ? *eps_frozen : sample_bias(params.bias, counts.size(), rng);
  return evaluate_choice(state, params, eps);
}

std::optional<Vector> resolve_frozen_bias(const ModelParams& params, std::size_t k, Rng& rng) {
  if (params.bias.mode == BiasMode::frozen) return sample_bias(params.bias, k, rng);
  return std::nullopt;
}

bool is_record_time(std::int64_t t, std::int64_t stride, std::int64_t final_time) {
  return t % stride == 0 || t == final_time;
}

Vector to_vector(const GroupCounts& counts) {
  return Vector(counts.counts.begin(), counts.counts.end());
}

}  // namespace

EntrantStep step_entrant(const GroupCounts& counts, const ModelParams& params,
                         const std::optional<Vector>& eps_frozen, Rng& rng) {
  ChoiceEvaluation eval = evaluate_counts(counts, params, eps_frozen, rng);
  const std::size_t chosen = categorical_index(eval.p, rng.uniform());
  EntrantStep out{counts, chosen, std::move(eval.p)};
  out.counts.add_member(chosen);
  return out;
}

EntryProcess::EntryProcess(GroupCounts initial, ModelParams params, Rng rng)
    : counts_(std::move(initial)), params_(std::move(params)), rng_(std::move(rng)) {
  frozen_bias_ = resolve_frozen_bias(params_, counts_.size(), rng_);
}

const ChoiceEvaluation& EntryProcess::current() {
  if (!pending_) pending_ = evaluate_counts(counts_, params_, frozen_bias_, rng_);
  return *pending_;
}

std::size_t EntryProcess::step() {
  const std::size_t chosen = categorical_index(current().p, rng_.uniform());
  counts_.add_member(chosen);
  pending_.reset();
  ++time_;
  last_chosen_ = chosen;
  return chosen;
}

void EntryProcess::record(Trajectory& out, std::optional<std::size_t> chosen) {
  const ChoiceEvaluation& eval = current();
  out.times.push_back(static_cast<double>(time_));
  out.counts_series.push_back(to_vector(counts_));
  out.pi_series.push_back(proportions(counts_).pi);
  out.theta_series.push_back(eval.theta);
  out.a_series.push_back(eval.potential);
  out.p_series.push_back(eval.p);
  out.chosen_series.push_back(chosen);
}

void EntryProcess::run(std::int64_t steps, std::int64_t stride, Trajectory& out) {
  if (stride < 1) throw ConfigError("invalid_record_every", "record stride must be at least 1");
  out.process = ProcessKind::entrant;
  out.frozen_bias = frozen_bias_.value_or(Vector{});
  if (out.times.empty()) record(out, last_chosen_);
  const std::int64_t final_time = time_ + steps;
  while (time_ < final_time) {
    const std::size_t chosen = step();
    if (is_record_time(time_, stride, final_time)) record(out, chosen);
  }
}

Vector initial_sizes(const SimConfig& config, Rng& rng) {
  if (config.init_counts) return *config.init_counts;
  Vector sizes(config.k_groups);
  for (double& s : sizes) s = static_cast<double>(rng.uniform_int(config.init_lo, config.init_hi));
  return sizes;
}

Trajectory run_entry_process(const SimConfig& config) {
  config.validate();
  if (config.process != ProcessKind::entrant) {
    throw ConfigError("wrong_process", "run_entry_process needs process = entrant");
  }
  Rng rng(config.seed);
  const Vector sizes = initial_sizes(config, rng);
  std::vector<std::int64_t> counts(sizes.size());
  for (std::size_t k = 0; k < sizes.size(); ++k) counts[k] = static_cast<std::int64_t>(sizes[k]);

  EntryProcess process(GroupCounts::from(std::move(counts)), config.params, std::move(rng));
  Trajectory out;
  process.run(config.t_steps, config.resolved_record_every(), out);
  return out;
}

Vector redistribute(std::span<const double> sizes, std::span<const double> p, double eta_frac,
                    double damping) {
  const double total = std::accumulate(sizes.begin(), sizes.end(), 0.0);
  const double entrants = eta_frac * total;
  Vector next(sizes.size());
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const double flow = damping * (total * p[k] - sizes[k]);
    next[k] = sizes[k] + entrants * p[k] + flow;
    if (next[k] < 0.0) {
      throw NumericalError("negative_size", "redistribution produced a negative group size");
    }
  }
  return next;
}

Vector step_redistribution(std::span<const double> sizes, const ModelParams& params,
                           std::span<const double> eps, double eta_frac, double damping) {
  const Vector p = choice_map(proportions(sizes), params, eps);
  return redistribute(sizes, p, eta_frac, damping);
}

Trajectory run_redistribution(const SimConfig& config) {
  config.validate();
  if (config.process != ProcessKind::redistribution) {
    throw ConfigError("wrong_process", "run_redistribution needs process = redistribution");
  }
  Rng rng(config.seed);
  Vector sizes = initial_sizes(config, rng);
  const std::optional<Vector> frozen = resolve_frozen_bias(config.params, config.k_groups, rng);
  const std::int64_t stride = config.resolved_record_every();

  Trajectory out;
  out.process = ProcessKind::redistribution;
  out.frozen_bias = frozen.value_or(Vector{});
  for (std::int64_t t = 0;; ++t) {
    const SimplexState state = proportions(sizes);
    const Vector eps = frozen ? *frozen : sample_bias(config.params.bias, config.k_groups, rng);
    ChoiceEvaluation eval = evaluate_choice(state, config.params, eps);
    if (is_record_time(t, stride, config.t_steps)) {
      out.times.push_back(static_cast<double>(t));
      out.counts_series.push_back(sizes);
      out.pi_series.push_back(state.pi);
      out.theta_series.push_back(eval.theta);
      out.a_series.push_back(eval.potential);
      out.p_series.push_back(eval.p);
      out.chosen_series.push_back(std::nullopt);
    }
    if (t == config.t_steps) break;
    sizes = redistribute(sizes, eval.p, config.eta_frac, config.damping);
  }
  return out;
}

Trajectory run_simulation(const SimConfig& config) {
  return config.process == ProcessKind::entrant ? run_entry_process(config)
                                                : run_redistribution(config);
}

EnsembleSummary run_ensemble(const SimConfig& config, std::size_t n_runs,
                             std::uint64_t base_seed, std::size_t threads) {
  if (n_runs < 1) throw ConfigError("invalid_runs", "an ensemble needs at least one run");
  config.validate();

  EnsembleSummary summary;
  summary.runs.resize(n_runs);
  parallel_for(
      n_runs,
      [&](std::size_t i) {
        SimConfig replica = config;
        replica.seed = base_seed + i;
        // Only the endpoints are needed.
        replica.record_every = std::max<std::int64_t>(1, replica.t_steps);
        const Trajectory traj = run_simulation(replica);
        EnsembleRun& run = summary.runs[i];
        run.seed = replica.seed;
        run.initial_counts = traj.counts_series.front();
        run.final_counts = traj.counts_series.back();
        run.final_pi = traj.pi_series.back();
        run.final_p = traj.p_series.back();
        run.stats = concentration_stats(run.final_counts);
      },
      threads);

  const std::size_t k = config.k_groups;
  summary.mean_pi.assign(k, 0.0);
  summary.std_pi.assign(k, 0.0);
  for (const auto& run : summary.runs) {
    for (std::size_t j = 0; j < k; ++j) summary.mean_pi[j] += run.final_pi[j];
  }
  for (double& m : summary.mean_pi) m /= static_cast<double>(n_runs);
  if (n_runs > 1) {
    for (const auto& run : summary.runs) {
      for (std::size_t j = 0; j < k; ++j) {
        const double d = run.final_pi[j] - summary.mean_pi[j];
        summary.std_pi[j] += d * d;
      }
    }
    for (double& s : summary.std_pi) s = std::sqrt(s / static_cast<double>(n_runs - 1));
  }
  return summary;
}

DriftEstimate drift_estimate(const GroupCounts& counts, const ModelParams& params,
                             const std::optional<Vector>& eps_frozen, std::size_t n_samples,
                             Rng& rng) {
  if (n_samples < 1) throw ConfigError("invalid_samples", "drift estimate needs n_samples >= 1");
  const std::size_t k = counts.size();
  const std::optional<Vector> bias =
      eps_frozen ? eps_frozen : resolve_frozen_bias(params, k, rng);
  const Vector pi = proportions(counts).pi;
  const double next_total = static_cast<double>(counts.total + 1);

  // Welford accumulation per coordinate.
  Vector mean(k, 0.0), m2(k, 0.0);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const EntrantStep step = step_entrant(counts, params, bias, rng);
    for (std::size_t j = 0; j < k; ++j) {
      const double delta_pi = static_cast<double>(step.counts.counts[j]) / next_total - pi[j];
      const double d = delta_pi - mean[j];
      mean[j] += d / static_cast<double>(s + 1);
      m2[j] += d * (delta_pi - mean[j]);
    }
  }
  Vector se(k, 0.0);
  if (n_samples > 1) {
    const double n = static_cast<double>(n_samples);
    for (std::size_t j = 0; j < k; ++j) se[j] = std::sqrt(m2[j] / (n - 1.0) / n);
  }
  return DriftEstimate{std::move(mean), std::move(se)};
}

}  // namespace groupform
