#include "groupform/experiments.hpp"

#include <numeric>

#include "groupform/errors.hpp"
#include "groupform/parallel.hpp"

namespace groupform {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::beta_sweep: return "beta_sweep";
    case Scenario::heterogeneous: return "heterogeneous";
    case Scenario::table_repro: return "table_repro";
    case Scenario::redistribution_demo: return "redistribution_demo";
  }
  return "table_repro";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
  for (Scenario s : {Scenario::beta_sweep, Scenario::heterogeneous, Scenario::table_repro,
                     Scenario::redistribution_demo}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

ExperimentSpec default_experiment(Scenario scenario, std::size_t n_seeds) {
  ExperimentSpec spec;
  spec.scenario = scenario;
  SimConfig& c = spec.config;
  c.params.attraction_mode = AttractionMode::full;
  c.params.bias.mode = BiasMode::frozen;
  c.init_lo = 1;
  c.init_hi = 10;
  std::size_t default_seeds = 10;

  switch (scenario) {
    case Scenario::beta_sweep:
      c.k_groups = 5;
      c.t_steps = 1000;
      c.params.bias.mu = 0.1;
      c.params.bias.sigma = 0.05;
      for (int i = 0; i <= 8; ++i) spec.betas.push_back(0.25 * i);
      break;
    case Scenario::heterogeneous:
      c.k_groups = 15;
      c.t_steps = 10000;
      c.init_hi = 20;
      c.params.bias.mu = 0.01;
      c.params.bias.sigma = 0.005;
      spec.betas = {-1.0, 0.0, 1.0};
      break;
    case Scenario::table_repro:
      c.k_groups = 10;
      c.t_steps = 3000;
      c.params.bias.mu = 0.01;
      c.params.bias.sigma = 0.005;
      spec.betas = {-0.5, 0.1, 0.5};
      default_seeds = 20;
      break;
    case Scenario::redistribution_demo:
      c.k_groups = 10;
      c.t_steps = 500;
      c.process = ProcessKind::redistribution;
      spec.betas = {-0.5, 0.1, 0.5};
      default_seeds = 1;
      break;
  }
  if (n_seeds == 0) n_seeds = default_seeds;
  for (std::size_t i = 0; i < n_seeds; ++i) spec.seeds.push_back(i + 1);
  return spec;
}

SummaryTable run_experiment(const ExperimentSpec& spec, std::size_t threads) {
  if (spec.betas.empty() || spec.seeds.empty()) {
    throw ConfigError("empty_experiment", "an experiment needs at least one beta and one seed");
  }
  const std::size_t n_beta = spec.betas.size(), n_seed = spec.seeds.size();
  const std::size_t k = spec.config.k_groups;

  struct CellResult {
    Trajectory traj;
  };
  std::vector<CellResult> results(n_beta * n_seed);
  parallel_for(
      results.size(),
      [&](std::size_t cell) {
        const std::size_t b = cell / n_seed, s = cell % n_seed;
        SimConfig config = spec.config;
        config.params.beta = spec.betas[b];
        config.seed = spec.seeds[s];
        if (s != 0) config.record_every = std::max<std::int64_t>(1, config.t_steps);
        results[cell].traj = run_simulation(config);
      },
      threads);

  SummaryTable table;
  table.scenario = spec.scenario;
  table.k_groups = k;
  table.t_steps = spec.config.t_steps;
  table.heuristic = spec.config.process == ProcessKind::redistribution;
  table.betas = spec.betas;
  table.seeds = spec.seeds;
  for (std::size_t b = 0; b < n_beta; ++b) {
    BetaAggregate agg{spec.betas[b]};
    for (std::size_t s = 0; s < n_seed; ++s) {
      Trajectory& traj = results[b * n_seed + s].traj;
      const Vector& initial = traj.counts_series.front();
      const Vector& final_sizes = traj.counts_series.back();
      for (std::size_t g = 0; g < k; ++g) {
        table.rows.push_back(SummaryRow{spec.betas[b], spec.seeds[s], g, initial[g], final_sizes[g],
                                        traj.pi_series.back()[g], traj.p_series.back()[g]});
      }
      CellSummary cell{spec.betas[b], spec.seeds[s],
                       std::accumulate(initial.begin(), initial.end(), 0.0),
                       std::accumulate(final_sizes.begin(), final_sizes.end(), 0.0),
                       concentration_stats(final_sizes)};
      agg.mean_ratio += cell.stats.max_min_ratio;
      agg.mean_max_share += cell.stats.max_share;
      agg.mean_gini += cell.stats.gini;
      table.cells.push_back(cell);
      if (s == 0) table.first_seed_trajectories.push_back(std::move(traj));
    }
    const double n = static_cast<double>(n_seed);
    agg.mean_ratio /= n;
    agg.mean_max_share /= n;
    agg.mean_gini /= n;
    table.aggregates.push_back(agg);
  }
  return table;
}

namespace {

SummaryTable run_checked(const ExperimentSpec& spec, Scenario expected, std::size_t threads) {
  if (spec.scenario != expected) {
    throw ConfigError("wrong_scenario", "expected scenario " + std::string(to_string(expected)) +
                                            ", got " + std::string(to_string(spec.scenario)));
  }
  return run_experiment(spec, threads);
}

}  // namespace

SummaryTable run_beta_sweep(const ExperimentSpec& spec, std::size_t threads) {
  return run_checked(spec, Scenario::beta_sweep, threads);
}

SummaryTable run_heterogeneous(const ExperimentSpec& spec, std::size_t threads) {
  return run_checked(spec, Scenario::heterogeneous, threads);
}

SummaryTable run_table_reproduction(const ExperimentSpec& spec, std::size_t threads) {
  return run_checked(spec, Scenario::table_repro, threads);
}

}  // namespace groupform
