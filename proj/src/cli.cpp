#include "groupform/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "groupform/config.hpp"
#include "groupform/errors.hpp"
#include "groupform/experiments.hpp"
#include "groupform/meanfield.hpp"
#include "groupform/serialize.hpp"
#include "groupform/spectral.hpp"

namespace groupform {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration (JSON)");
  cmd->add_option("--set", opts.sets, "override, e.g. --set process.t_steps=500")->allow_extra_args(false);
}

RunConfig load(const CommonOptions& opts, const RunConfig& base) {
  std::optional<fs::path> path;
  if (!opts.config_path.empty()) path = opts.config_path;
  return load_run_config(path, opts.sets, base);
}

fs::path prepare_output(const RunConfig& cfg) {
  const fs::path dir(cfg.output.directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("mkdir_failed", "cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

/// config.json re-feeds the run exactly; metadata.json adds provenance.
void write_run_files(const fs::path& dir, const json& metadata) {
  write_text(dir / "config.json", metadata.at("config").dump(2) + "\n");
  write_text(dir / "metadata.json", metadata.dump(2) + "\n");
}

SimplexState uniform_state(std::size_t k) { return SimplexState{Vector(k, 1.0 / static_cast<double>(k))}; }

SimplexState analysis_start(const RunConfig& cfg) {
  if (cfg.analysis.point) return renormalize(*cfg.analysis.point).state;
  if (cfg.sim.init_counts) return proportions(*cfg.sim.init_counts);
  return uniform_state(cfg.sim.k_groups);
}

FixedPointOptions fixed_point_options(const AnalysisConfig& a) {
  return FixedPointOptions{a.relax, a.tol, a.max_iter};
}

void flatten(const json& node, const std::string& prefix, std::map<std::string, json>& out) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else {
    out[prefix] = node;
  }
}

std::vector<std::string> changed_keys(const json& before, const json& after) {
  std::map<std::string, json> a, b;
  flatten(before, "", a);
  flatten(after, "", b);
  std::vector<std::string> out;
  for (const auto& [key, value] : b) {
    if (key.rfind("output.", 0) == 0) continue;
    auto it = a.find(key);
    if (it == a.end() || it->second != value) out.push_back(key + "=" + value.dump());
  }
  return out;
}

void report_ok(std::ostream& out, std::string_view command, const fs::path& dir) {
  out << json{{"status", "ok"}, {"command", command}, {"directory", dir.string()}}.dump() << '\n';
}

int run_simulate(const CommonOptions& opts, std::ostream& out) {
  const RunConfig cfg = load(opts, default_run_config());
  const Trajectory traj = run_simulation(cfg.sim);
  const fs::path dir = prepare_output(cfg);

  json metadata = metadata_json("simulate", to_json(cfg));
  metadata["seed"] = cfg.sim.seed;
  metadata["frozen_bias"] = traj.frozen_bias;
  if (cfg.sim.process == ProcessKind::redistribution) metadata["heuristic"] = true;
  write_run_files(dir, metadata);
  write_trajectory_csv(traj, dir / "trajectory.csv");

  const Vector& final_counts = traj.counts_series.back();
  const ConcentrationStats stats = concentration_stats(final_counts);
  if (cfg.output.wants("json")) {
    write_document(dir / "summary.json", metadata,
                   json{{"initial_counts", traj.counts_series.front()},
                        {"final_counts", final_counts},
                        {"final_pi", traj.pi_series.back()},
                        {"final_p", traj.p_series.back()},
                        {"max_min_ratio", stats.max_min_ratio},
                        {"max_share", stats.max_share},
                        {"gini", stats.gini}});
  }
  if (cfg.output.wants("csv")) {
    std::string csv = "group,initial,final,final_pi,final_p\n";
    for (std::size_t g = 0; g < final_counts.size(); ++g) {
      csv += std::to_string(g) + ',' + format_double(traj.counts_series.front()[g]) + ',' +
             format_double(final_counts[g]) + ',' + format_double(traj.pi_series.back()[g]) + ',' +
             format_double(traj.p_series.back()[g]) + '\n';
    }
    write_text(dir / "summary.csv", csv);
  }
  report_ok(out, "simulate", dir);
  return kExitOk;
}

int run_ensemble_cmd(const CommonOptions& opts, std::size_t runs, std::size_t threads, std::ostream& out) {
  const RunConfig cfg = load(opts, default_run_config());
  const EnsembleSummary summary = run_ensemble(cfg.sim, runs, cfg.sim.seed, threads);
  const fs::path dir = prepare_output(cfg);
  json metadata = metadata_json("ensemble", to_json(cfg));
  metadata["runs"] = runs;
  metadata["base_seed"] = cfg.sim.seed;
  write_run_files(dir, metadata);
  if (cfg.output.wants("csv")) write_text(dir / "ensemble.csv", ensemble_csv(summary));
  if (cfg.output.wants("json")) write_document(dir / "ensemble.json", metadata, to_json(summary));
  report_ok(out, "ensemble", dir);
  return kExitOk;
}

void write_formats(const RunConfig& cfg, const fs::path& dir, const std::string& stem,
                   const std::function<void(const fs::path&, SummaryFormat)>& writer) {
  if (cfg.output.wants("csv")) writer(dir / (stem + ".csv"), SummaryFormat::csv);
  if (cfg.output.wants("json")) writer(dir / (stem + ".json"), SummaryFormat::structured);
}


int not_converged(std::ostream& err, const FixedPointResult& r) {
  err << json{{"status", "error"},
              {"kind", "numerical"},
              {"code", "fixed_point_not_converged"},
              {"message", "fixed-point iteration stopped at residual " + format_double(r.residual_norm)}}
             .dump()
      << '\n';
  return kExitNumerical;
}

int run_fixedpoint(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load(opts, default_run_config());
  const Vector eps = analysis_bias(cfg.sim.params, cfg.sim.k_groups);
  const FixedPointResult result =
      solve_fixed_point(cfg.sim.params, eps, analysis_start(cfg), fixed_point_options(cfg.analysis));
  const fs::path dir = prepare_output(cfg);
  json metadata = metadata_json("fixedpoint", to_json(cfg));
  metadata["bias"] = eps;
  write_run_files(dir, metadata);
  write_formats(cfg, dir, "fixedpoint", [&](const fs::path& p, SummaryFormat f) {
    write_summary(result, p, f, metadata);
  });
  if (!result.converged) return not_converged(err, result);
  report_ok(out, "fixedpoint", dir);
  return kExitOk;
}

int run_ode(const CommonOptions& opts, std::ostream& out) {
  const RunConfig cfg = load(opts, default_run_config());
  const Vector eps = analysis_bias(cfg.sim.params, cfg.sim.k_groups);
  const Trajectory traj = integrate_ode(analysis_start(cfg), cfg.sim.params, eps, cfg.analysis.dt,
                                        cfg.analysis.t_end, cfg.sim.record_every.value_or(1));
  const fs::path dir = prepare_output(cfg);
  json metadata = metadata_json("ode", to_json(cfg));
  metadata["bias"] = eps;
  write_run_files(dir, metadata);
  write_trajectory_csv(traj, dir / "trajectory.csv");
  if (cfg.output.wants("json")) {
    write_document(dir / "ode.json", metadata,
                   json{{"final_time", traj.times.back()},
                        {"final_pi", traj.pi_series.back()},
                        {"max_renormalization", traj.max_renormalization},
                        {"warnings", traj.warnings}});
  }
  report_ok(out, "ode", dir);
  return kExitOk;
}

int run_stability(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load(opts, default_run_config());
  const Vector eps = analysis_bias(cfg.sim.params, cfg.sim.k_groups);
  std::optional<FixedPointResult> fixed;
  SimplexState point;
  if (cfg.analysis.point) {
    point = SimplexState{*cfg.analysis.point};
  } else {
    fixed = solve_fixed_point(cfg.sim.params, eps, uniform_state(cfg.sim.k_groups),
                              fixed_point_options(cfg.analysis));
    if (!fixed->converged) return not_converged(err, *fixed);
    point = fixed->pi_star;
  }
  const SpectralReport report = spectral_report(cfg.sim.params, eps, point, cfg.analysis.jacobian_step);
  const fs::path dir = prepare_output(cfg);
  json metadata = metadata_json("stability", to_json(cfg));
  metadata["bias"] = eps;
  if (fixed) metadata["fixed_point"] = to_json(*fixed);
  write_run_files(dir, metadata);
  write_formats(cfg, dir, "stability", [&](const fs::path& p, SummaryFormat f) {
    write_summary(report, p, f, metadata);
  });
  report_ok(out, "stability", dir);
  return kExitOk;
}

int run_hessian(const CommonOptions& opts, int grid, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load(opts, default_run_config());
  const HessianDegeneracyReport report = hessian_degeneracy_report(grid);
  const fs::path dir = prepare_output(cfg);
  json metadata = metadata_json("hessian", to_json(cfg));
  metadata["grid_n"] = grid;
  write_run_files(dir, metadata);
  write_document(dir / "hessian.json", metadata, to_json(report));
  if (!report.passed()) {
    err << json{{"status", "error"}, {"kind", "numerical"}, {"code", "hessian_not_degenerate"},
                {"message", "Hessian survey failed a degeneracy check"}}
               .dump()
        << '\n';
    return kExitNumerical;
  }
  report_ok(out, "hessian", dir);
  return kExitOk;
}

int run_approx(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load(opts, default_run_config());
  if (!cfg.analysis.eta_perturb) {
    throw ConfigError("missing_eta", "approx needs analysis.eta_perturb");
  }
  PerturbationInput input;
  input.theta = cfg.sim.params.theta_scalar;
  input.beta = cfg.sim.params.beta;
  input.eps_base = cfg.analysis.eps_base.value_or(cfg.sim.params.bias.mu);
  input.eta_perturb = *cfg.analysis.eta_perturb;
  input.k_groups = cfg.sim.k_groups;

  const SimplexState approx = first_order_equilibrium(input);
  const FixedPointResult numeric =
      solve_fixed_point(perturbation_params(input), perturbation_bias(input),
                        uniform_state(input.k_groups), fixed_point_options(cfg.analysis));
  double max_error = 0.0;
  std::string csv = "group,first_order,numeric,abs_error\n";
  for (std::size_t k = 0; k < input.k_groups; ++k) {
    const double e = std::abs(approx.pi[k] - numeric.pi_star.pi[k]);
    max_error = std::max(max_error, e);
    csv += std::to_string(k) + ',' + format_double(approx.pi[k]) + ',' +
           format_double(numeric.pi_star.pi[k]) + ',' + format_double(e) + '\n';
  }
  const fs::path dir = prepare_output(cfg);
  json metadata = metadata_json("approx", to_json(cfg));
  write_run_files(dir, metadata);
  if (cfg.output.wants("csv")) write_text(dir / "approx.csv", csv);
  if (cfg.output.wants("json")) {
    write_document(dir / "approx.json", metadata,
                   json{{"first_order", approx.pi},
                        {"numeric", to_json(numeric)},
                        {"max_abs_error", max_error}});
  }
  if (!numeric.converged) return not_converged(err, numeric);
  report_ok(out, "approx", dir);
  return kExitOk;
}

struct ExperimentOptions {
  std::string scenario;
  std::size_t seeds = 0;
  std::uint64_t base_seed = 1;
  std::vector<double> betas;
  std::size_t threads = 0;
};

int run_experiment_cmd(const CommonOptions& opts, const ExperimentOptions& eo, std::ostream& out) {
  const auto scenario = parse_scenario(eo.scenario);
  if (!scenario) throw ConfigError("unknown_scenario", "unknown scenario '" + eo.scenario + "'");
  ExperimentSpec spec = default_experiment(*scenario, eo.seeds);
  for (auto& s : spec.seeds) s += eo.base_seed - 1;
  if (!eo.betas.empty()) spec.betas = eo.betas;

  RunConfig base = default_run_config();
  base.sim = spec.config;
  const RunConfig cfg = load(opts, base);
  spec.config = cfg.sim;
  spec.overrides = changed_keys(to_json(base), to_json(cfg));

  const SummaryTable table = run_experiment(spec, eo.threads);
  const fs::path dir = prepare_output(cfg);
  json metadata = metadata_json("experiment", to_json(cfg));
  metadata["scenario"] = to_string(spec.scenario);
  metadata["betas"] = spec.betas;
  metadata["seeds"] = spec.seeds;
  metadata["overrides"] = spec.overrides;
  if (table.heuristic) {
    metadata["heuristic"] = true;
    metadata["note"] = "redistribution update n' = n + eta N p + damping (N p - n) is a modeling choice";
  }
  write_run_files(dir, metadata);
  if (cfg.output.wants("csv")) {
    write_summary(table, dir / "summary.csv", SummaryFormat::csv, metadata);
    write_text(dir / "summary_rows.csv", summary_rows_csv(table));
  }
  if (cfg.output.wants("json")) write_summary(table, dir / "summary.json", SummaryFormat::structured, metadata);
  for (std::size_t b = 0; b < table.first_seed_trajectories.size(); ++b) {
    write_trajectory_csv(table.first_seed_trajectories[b], dir / ("trajectory_beta" + std::to_string(b) + ".csv"));
  }
  report_ok(out, "experiment", dir);
  return kExitOk;
}

int error_exit(std::ostream& err, std::string_view kind, std::string_view code, std::string_view message,
               int status) {
  err << json{{"status", "error"}, {"kind", kind}, {"code", code}, {"message", message}}.dump() << '\n';
  return status;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Group-formation simulator and equilibrium analysis", "groupform"};
  app.require_subcommand(1);

  CommonOptions common;
  auto* simulate = app.add_subcommand("simulate", "entrant or redistribution run");
  add_common(simulate, common);

  std::size_t runs = 20, threads = 0;
  auto* ensemble = app.add_subcommand("ensemble", "independent replicas with consecutive seeds");
  add_common(ensemble, common);
  ensemble->add_option("--runs", runs, "number of replicas")->check(CLI::PositiveNumber);
  ensemble->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto* fixedpoint = app.add_subcommand("fixedpoint", "solve pi = p(pi) by damped iteration");
  add_common(fixedpoint, common);
  auto* ode = app.add_subcommand("ode", "integrate the mean-field ODE with RK4");
  add_common(ode, common);
  auto* stability = app.add_subcommand("stability", "Jacobian spectrum and classification");
  add_common(stability, common);

  int grid = 99;
  auto* hessian = app.add_subcommand("hessian", "Hessian degeneracy survey of M(x, y)");
  add_common(hessian, common);
  hessian->add_option("--grid", grid, "grid points per axis")->check(CLI::Range(2, 100000));

  auto* approx = app.add_subcommand("approx", "first-order vs numeric biased equilibrium");
  add_common(approx, common);

  ExperimentOptions eo;
  auto* experiment = app.add_subcommand("experiment", "canned scenario");
  add_common(experiment, common);
  experiment->add_option("scenario", eo.scenario, "beta_sweep | heterogeneous | table_repro | redistribution_demo")
      ->required();
  experiment->add_option("--seeds", eo.seeds, "number of seeds (default per scenario)");
  experiment->add_option("--base-seed", eo.base_seed, "first seed");
  experiment->add_option("--betas", eo.betas, "beta values (default per scenario)");
  experiment->add_option("--threads", eo.threads, "worker threads (0 = all cores)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return error_exit(err, "config", "invalid_arguments", e.what(), kExitConfig);
  }

  try {
    if (*simulate) return run_simulate(common, out);
    if (*ensemble) return run_ensemble_cmd(common, runs, threads, out);
    if (*fixedpoint) return run_fixedpoint(common, out, err);
    if (*ode) return run_ode(common, out);
    if (*stability) return run_stability(common, out, err);
    if (*hessian) return run_hessian(common, grid, out, err);
    if (*approx) return run_approx(common, out, err);
    if (*experiment) return run_experiment_cmd(common, eo, out);
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::config: return error_exit(err, "config", e.code(), e.what(), kExitConfig);
      case ErrorKind::numerical: return error_exit(err, "numerical", e.code(), e.what(), kExitNumerical);
      case ErrorKind::io: return error_exit(err, "io", e.code(), e.what(), kExitIo);
    }
  } catch (const fs::filesystem_error& e) {
    return error_exit(err, "io", "filesystem", e.what(), kExitIo);
  } catch (const std::exception& e) {
    return error_exit(err, "internal", "unexpected", e.what(), kExitInternal);
  }
  return kExitInternal;
}

}  // namespace groupform
