#pragma once

// Run configuration documents: JSON with model / process / analysis / output
// sections, dotted-key overrides, and fully materialized defaults.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "groupform/sim.hpp"

namespace groupform {

/// Settings for the deterministic subcommands (fixedpoint, ode, stability, approx).
struct AnalysisConfig {
  double relax = 0.5;
  double tol = 1e-12;
  std::int64_t max_iter = 100000;
  double dt = 0.01;
  double t_end = 50.0;
  double jacobian_step = 1e-6;
  std::optional<Vector> point;        // evaluation / starting state
  std::optional<Vector> eta_perturb;  // bias offsets for `approx`
  std::optional<double> eps_base;     // symmetric bias for `approx`; defaults to bias.mu
};

struct OutputConfig {
  std::string directory = "groupform_out";
  std::vector<std::string> formats = {"csv", "json"};

  bool wants(std::string_view format) const;
};

struct RunConfig {
  SimConfig sim;
  AnalysisConfig analysis;
  OutputConfig output;
};

/// Environment variable consulted for the default output directory.
inline constexpr const char* kOutputDirEnv = "GROUPFORM_OUTPUT_DIR";

RunConfig default_run_config();

/// Canonical document with every field present.
nlohmann::json to_json(const RunConfig& config);

/// Overlays `doc` on `base`, rejecting keys that `base` does not define,
/// then validates. Throws ConfigError.
RunConfig parse_run_config(const nlohmann::json& doc, const RunConfig& base);
RunConfig parse_run_config(const nlohmann::json& doc);

/// Applies "dotted.key=value" to `doc`; the value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Reads the config file (if any), applies overrides in order and parses the
/// result over `base`.
RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const std::vector<std::string>& overrides,
                          const RunConfig& base);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace groupform
