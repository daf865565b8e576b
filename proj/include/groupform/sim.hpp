#pragma once

// Sequential-entrant Markov process, the deterministic redistribution
// variant, and seeded ensemble execution.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "groupform/concentration.hpp"
#include "groupform/model.hpp"
#include "groupform/rng.hpp"

namespace groupform {

// mean_field marks trajectories produced by the ODE integrator.
enum class ProcessKind { entrant, redistribution, mean_field };

struct SimConfig {
  std::size_t k_groups = 5;
  std::int64_t t_steps = 1000;
  ModelParams params;
  /// Explicit initial sizes; when absent, sizes are drawn uniformly from
  /// [init_lo, init_hi] with the run's RNG before anything else.
  std::optional<Vector> init_counts;
  std::int64_t init_lo = 1;
  std::int64_t init_hi = 10;
  std::uint64_t seed = 1;
  ProcessKind process = ProcessKind::entrant;
  double eta_frac = 0.05;
  double damping = 0.1;
  std::optional<std::int64_t> record_every;

  void validate() const;
  /// 1 for T <= 10^4, else ceil(T / 10^4), unless set explicitly.
  std::int64_t resolved_record_every() const;
};

/// Time-indexed record of a run. Per record: sizes, proportions, the
/// (theta, a, p) evaluation at that state, and for entrant runs the group
/// the most recent entrant joined (absent at t = 0).
struct Trajectory {
  ProcessKind process = ProcessKind::entrant;
  std::vector<double> times;
  std::vector<Vector> counts_series;
  std::vector<Vector> pi_series;
  std::vector<Vector> theta_series;
  std::vector<Vector> a_series;
  std::vector<Vector> p_series;
  std::vector<std::optional<std::size_t>> chosen_series;
  Vector frozen_bias;  // empty when bias is resampled per step
  double max_renormalization = 0.0;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return times.size(); }
  std::size_t groups() const noexcept { return pi_series.empty() ? 0 : pi_series.front().size(); }
};

struct EntrantStep {
  GroupCounts counts;
  std::size_t chosen = 0;
  Vector p;
};

/// One entrant: evaluate p at the current proportions (fresh bias from `rng`
/// unless `eps_frozen` is given), draw one uniform, join by inverse CDF.
EntrantStep step_entrant(const GroupCounts& counts, const ModelParams& params,
                         const std::optional<Vector>& eps_frozen, Rng& rng);

/// Resumable entrant process. Copying or continuing an instance carries the
/// full Markov state (counts, pending bias draw, RNG).
class EntryProcess {
 public:
  /// Frozen bias is resolved here (explicit, or sampled once from `rng`).
  EntryProcess(GroupCounts initial, ModelParams params, Rng rng);

  const GroupCounts& counts() const noexcept { return counts_; }
  std::int64_t time() const noexcept { return time_; }
  const Rng& rng() const noexcept { return rng_; }
  const std::optional<Vector>& frozen_bias() const noexcept { return frozen_bias_; }

  /// Evaluation at the current state; in per-step mode the bias drawn here
  /// is the one the next entrant uses.
  const ChoiceEvaluation& current();

  std::size_t step();

  /// Advances `steps` entrants, appending records to `out` at every multiple
  /// of `stride` and at the final time. Records the current state first when
  /// `out` is empty.
  void run(std::int64_t steps, std::int64_t stride, Trajectory& out);

 private:
  void record(Trajectory& out, std::optional<std::size_t> chosen);

  GroupCounts counts_;
  ModelParams params_;
  Rng rng_;
  std::optional<Vector> frozen_bias_;
  std::optional<ChoiceEvaluation> pending_;
  std::int64_t time_ = 0;
  std::optional<std::size_t> last_chosen_;
};

/// Initial sizes for a config: explicit or drawn from the range with `rng`.
Vector initial_sizes(const SimConfig& config, Rng& rng);

Trajectory run_entry_process(const SimConfig& config);

/// Allocates eta*N entrants by p and moves existing members toward N*p with
/// the given damping: n' = n + eta N p + damping (N p - n).
Vector redistribute(std::span<const double> sizes, std::span<const double> p, double eta_frac,
                    double damping);

Vector step_redistribution(std::span<const double> sizes, const ModelParams& params,
                           std::span<const double> eps, double eta_frac, double damping);

Trajectory run_redistribution(const SimConfig& config);

/// Dispatches on config.process.
Trajectory run_simulation(const SimConfig& config);

struct EnsembleRun {
  std::uint64_t seed = 0;
  Vector initial_counts;
  Vector final_counts;
  Vector final_pi;
  Vector final_p;
  ConcentrationStats stats;
};

struct EnsembleSummary {
  std::vector<EnsembleRun> runs;  // ascending seed order
  Vector mean_pi;
  Vector std_pi;  // sample standard deviation; zero for a single run
};

/// Replicas with seeds base_seed + 0 .. n_runs - 1, possibly concurrent.
EnsembleSummary run_ensemble(const SimConfig& config, std::size_t n_runs,
                             std::uint64_t base_seed, std::size_t threads = 0);

struct DriftEstimate {
  Vector mean;
  Vector std_error;
};

/// Monte Carlo estimate of E[pi(t+1) - pi(t)] from `n_samples` independent
/// single steps out of the same counts. Bias: `eps_frozen` if given, else
/// per the params (frozen mode samples once up front).
DriftEstimate drift_estimate(const GroupCounts& counts, const ModelParams& params,
                             const std::optional<Vector>& eps_frozen, std::size_t n_samples,
                             Rng& rng);

}  // namespace groupform
