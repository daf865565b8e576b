#pragma once

// Canned simulation scenarios with per-seed results and cross-seed summaries.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groupform/concentration.hpp"
#include "groupform/sim.hpp"

namespace groupform {

enum class Scenario { beta_sweep, heterogeneous, table_repro, redistribution_demo };

std::string_view to_string(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);

struct ExperimentSpec {
  Scenario scenario = Scenario::table_repro;
  SimConfig config;  // seed field unused; one run per (beta, seed)
  std::vector<double> betas;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> overrides;  // "key=value" changes applied on top of the defaults
};

/// Scenario defaults:
///   beta_sweep           K=5,  T=1000,  init [1,10], beta 0.0..2.0 step 0.25, bias N(0.1, 0.05^2)
///   heterogeneous        K=15, T=10000, init [1,20], beta {-1, 0, 1},          bias N(0.01, 0.005^2)
///   table_repro          K=10, T=3000,  init [1,10], beta {-0.5, 0.1, 0.5},    bias N(0.01, 0.005^2)
///   redistribution_demo  K=10, T=500,   init [1,10], beta {-0.5, 0.1, 0.5},    redistribution process
/// All use the full attraction model with bias frozen per run; seeds default
/// to 1..n_seeds.
ExperimentSpec default_experiment(Scenario scenario, std::size_t n_seeds = 0);

struct SummaryRow {
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::size_t group = 0;
  double initial = 0.0;
  double final_size = 0.0;
  double final_pi = 0.0;
  double final_p = 0.0;
};

struct CellSummary {
  double beta = 0.0;
  std::uint64_t seed = 0;
  double initial_total = 0.0;
  double final_total = 0.0;
  ConcentrationStats stats;
};

struct BetaAggregate {
  double beta = 0.0;
  double mean_ratio = 0.0;
  double mean_max_share = 0.0;
  double mean_gini = 0.0;
};

struct SummaryTable {
  Scenario scenario = Scenario::table_repro;
  std::size_t k_groups = 0;
  std::int64_t t_steps = 0;
  bool heuristic = false;  // redistribution update is a modeling choice, not a derived law
  std::vector<double> betas;
  std::vector<std::uint64_t> seeds;
  std::vector<SummaryRow> rows;        // ordered by (beta, seed, group)
  std::vector<CellSummary> cells;      // ordered by (beta, seed)
  std::vector<BetaAggregate> aggregates;
  std::vector<Trajectory> first_seed_trajectories;  // one per beta

  const CellSummary& cell(std::size_t beta_index, std::size_t seed_index) const {
    return cells.at(beta_index * seeds.size() + seed_index);
  }
};

/// Runs every (beta, seed) cell, possibly concurrently; assembly order is
/// deterministic.
SummaryTable run_experiment(const ExperimentSpec& spec, std::size_t threads = 0);

SummaryTable run_beta_sweep(const ExperimentSpec& spec, std::size_t threads = 0);
SummaryTable run_heterogeneous(const ExperimentSpec& spec, std::size_t threads = 0);
SummaryTable run_table_reproduction(const ExperimentSpec& spec, std::size_t threads = 0);

}  // namespace groupform
