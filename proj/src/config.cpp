#include "groupform/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "groupform/errors.hpp"

namespace groupform {

using nlohmann::json;

bool OutputConfig::wants(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

RunConfig default_run_config() {
  RunConfig config;
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
    config.output.directory = dir;
  }
  return config;
}

namespace {

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string_view mode_name(AttractionMode m) { return m == AttractionMode::full ? "full" : "reduced"; }
std::string_view bias_mode_name(BiasMode m) { return m == BiasMode::frozen ? "frozen" : "per_step"; }
std::string_view process_name(ProcessKind p) {
  return p == ProcessKind::redistribution ? "redistribution" : "entrant";
}

void merge_checked(json& base, const json& overlay, const std::string& path) {
  if (!overlay.is_object()) {
    throw ConfigError("invalid_document", "section '" + path + "' must be an object");
  }
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string key_path = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown_key", "unknown config key '" + key_path + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_checked(slot, it.value(), key_path);
    } else {
      slot = it.value();
    }
  }
}

template <class T>
T get_as(const json& doc, const char* section, const char* key) {
  try {
    return doc.at(section).at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("invalid_value", std::string(section) + "." + key + ": " + e.what());
  }
}

template <class T>
std::optional<T> get_optional(const json& node, const std::string& where) {
  if (node.is_null()) return std::nullopt;
  try {
    return node.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("invalid_value", where + ": " + e.what());
  }
}

}  // namespace

json to_json(const RunConfig& config) {
  const SimConfig& s = config.sim;
  const ModelParams& m = s.params;
  const AnalysisConfig& a = config.analysis;
  json doc;
  doc["model"] = {
      {"k_groups", s.k_groups},
      {"beta", m.beta},
      {"attraction_mode", mode_name(m.attraction_mode)},
      {"theta_scalar", m.theta_scalar},
      {"bias",
       {{"mode", bias_mode_name(m.bias.mode)},
        {"mu", m.bias.mu},
        {"sigma", m.bias.sigma},
        {"explicit", optional_json(m.bias.explicit_values)}}},
      {"smoothing", m.smoothing},
      {"floor", m.floor},
  };
  doc["process"] = {
      {"type", process_name(s.process)},
      {"t_steps", s.t_steps},
      {"init", {{"counts", optional_json(s.init_counts)}, {"range", {s.init_lo, s.init_hi}}}},
      {"seed", s.seed},
      {"eta_frac", s.eta_frac},
      {"damping", s.damping},
      {"record_every", s.resolved_record_every()},
  };
  doc["analysis"] = {
      {"relax", a.relax},
      {"tol", a.tol},
      {"max_iter", a.max_iter},
      {"dt", a.dt},
      {"t_end", a.t_end},
      {"jacobian_step", a.jacobian_step},
      {"point", optional_json(a.point)},
      {"eta_perturb", optional_json(a.eta_perturb)},
      {"eps_base", optional_json(a.eps_base)},
  };
  doc["output"] = {{"directory", config.output.directory}, {"formats", config.output.formats}};
  return doc;
}

RunConfig parse_run_config(const json& doc, const RunConfig& base) {
  json merged = to_json(base);
  // record_every materializes to a number; keep it nullable for overlays.
  merged["process"]["record_every"] = base.sim.record_every ? json(*base.sim.record_every) : json(nullptr);
  merge_checked(merged, doc, "");

  RunConfig out;
  SimConfig& s = out.sim;
  ModelParams& m = s.params;

  s.k_groups = get_as<std::size_t>(merged, "model", "k_groups");
  m.beta = get_as<double>(merged, "model", "beta");
  const auto mode = get_as<std::string>(merged, "model", "attraction_mode");
  if (mode == "full") m.attraction_mode = AttractionMode::full;
  else if (mode == "reduced") m.attraction_mode = AttractionMode::reduced;
  else throw ConfigError("invalid_value", "model.attraction_mode must be 'full' or 'reduced'");
  m.theta_scalar = get_as<double>(merged, "model", "theta_scalar");
  const json& bias = merged["model"]["bias"];
  const auto bias_mode = get_optional<std::string>(bias.at("mode"), "model.bias.mode").value_or("");
  if (bias_mode == "frozen") m.bias.mode = BiasMode::frozen;
  else if (bias_mode == "per_step") m.bias.mode = BiasMode::per_step;
  else throw ConfigError("invalid_value", "model.bias.mode must be 'frozen' or 'per_step'");
  m.bias.mu = get_optional<double>(bias.at("mu"), "model.bias.mu").value_or(0.0);
  m.bias.sigma = get_optional<double>(bias.at("sigma"), "model.bias.sigma").value_or(0.0);
  m.bias.explicit_values = get_optional<Vector>(bias.at("explicit"), "model.bias.explicit");
  m.smoothing = get_as<double>(merged, "model", "smoothing");
  m.floor = get_as<double>(merged, "model", "floor");

  const auto type = get_as<std::string>(merged, "process", "type");
  if (type == "entrant") s.process = ProcessKind::entrant;
  else if (type == "redistribution") s.process = ProcessKind::redistribution;
  else throw ConfigError("invalid_value", "process.type must be 'entrant' or 'redistribution'");
  s.t_steps = get_as<std::int64_t>(merged, "process", "t_steps");
  const json& init = merged["process"]["init"];
  if (!init.is_object()) throw ConfigError("invalid_value", "process.init must be an object");
  s.init_counts = get_optional<Vector>(init.at("counts"), "process.init.counts");
  const auto range = get_optional<std::vector<std::int64_t>>(init.at("range"), "process.init.range");
  if (!range || range->size() != 2) {
    throw ConfigError("invalid_value", "process.init.range must be [lo, hi]");
  }
  s.init_lo = (*range)[0];
  s.init_hi = (*range)[1];
  s.seed = get_as<std::uint64_t>(merged, "process", "seed");
  s.eta_frac = get_as<double>(merged, "process", "eta_frac");
  s.damping = get_as<double>(merged, "process", "damping");
  s.record_every = get_optional<std::int64_t>(merged["process"]["record_every"], "process.record_every");

  AnalysisConfig& a = out.analysis;
  a.relax = get_as<double>(merged, "analysis", "relax");
  a.tol = get_as<double>(merged, "analysis", "tol");
  a.max_iter = get_as<std::int64_t>(merged, "analysis", "max_iter");
  a.dt = get_as<double>(merged, "analysis", "dt");
  a.t_end = get_as<double>(merged, "analysis", "t_end");
  a.jacobian_step = get_as<double>(merged, "analysis", "jacobian_step");
  a.point = get_optional<Vector>(merged["analysis"]["point"], "analysis.point");
  a.eta_perturb = get_optional<Vector>(merged["analysis"]["eta_perturb"], "analysis.eta_perturb");
  a.eps_base = get_optional<double>(merged["analysis"]["eps_base"], "analysis.eps_base");

  out.output.directory = get_as<std::string>(merged, "output", "directory");
  out.output.formats = get_as<std::vector<std::string>>(merged, "output", "formats");
  for (const auto& f : out.output.formats) {
    if (f != "csv" && f != "json") throw ConfigError("invalid_value", "output.formats accepts 'csv' and 'json'");
  }
  if (out.output.directory.empty()) throw ConfigError("invalid_value", "output.directory must be set");

  s.validate();
  if (a.point && a.point->size() != s.k_groups) {
    throw ConfigError("invalid_value", "analysis.point must have k_groups entries");
  }
  if (a.eta_perturb && a.eta_perturb->size() != s.k_groups) {
    throw ConfigError("invalid_value", "analysis.eta_perturb must have k_groups entries");
  }
  return out;
}

RunConfig parse_run_config(const json& doc) { return parse_run_config(doc, default_run_config()); }

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("invalid_override", "override must look like key.path=value: '" +
                                              std::string(assignment) + "'");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("invalid_override", "empty path segment in '" + key + "'");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_failed", "cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc = json::parse(buffer.str(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw ConfigError("invalid_json", "'" + path.string() + "' is not valid JSON");
  return doc;
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const std::vector<std::string>& overrides, const RunConfig& base) {
  json doc = path ? read_json_file(*path) : json::object();
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_run_config(doc, base);
}

}  // namespace groupform
