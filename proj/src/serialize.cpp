#include "groupform/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "groupform/errors.hpp"
#include "groupform/rng.hpp"

namespace groupform {

using nlohmann::json;

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw IoError("parse_failed", "not a number: '" + std::string(text) + "'");
  }
  return value;
}

namespace {

constexpr std::string_view kTrajectoryHeader = "t,group,n,pi,theta,a,p,chosen";

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                        : comma - start));
    if (comma == std::string_view::npos) return fields;
    start = comma + 1;
  }
}

json complex_pairs(const Eigen::VectorXcd& v) {
  json out = json::array();
  for (const auto& z : v) out.push_back({z.real(), z.imag()});
  return out;
}

json matrix_rows(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

std::string beta_label(double beta) { return "beta=" + format_double(beta); }

}  // namespace

std::string trajectory_csv(const Trajectory& traj) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  const bool has_counts = !traj.counts_series.empty();
  for (std::size_t r = 0; r < traj.size(); ++r) {
    const std::string t = format_double(traj.times[r]);
    const auto& chosen = traj.chosen_series[r];
    const std::string chosen_text = chosen ? std::to_string(*chosen) : std::string();
    for (std::size_t g = 0; g < traj.pi_series[r].size(); ++g) {
      out += t;
      out += ',' + std::to_string(g);
      out += ',' + (has_counts ? format_double(traj.counts_series[r][g]) : std::string());
      out += ',' + format_double(traj.pi_series[r][g]);
      out += ',' + format_double(traj.theta_series[r][g]);
      out += ',' + format_double(traj.a_series[r][g]);
      out += ',' + format_double(traj.p_series[r][g]);
      out += ',' + chosen_text;
      out += '\n';
    }
  }
  return out;
}

Trajectory parse_trajectory_csv(std::string_view text) {
  Trajectory traj;
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    const auto nl = text.find('\n', pos);
    line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    return true;
  };
  std::string_view line;
  if (!next_line(line) || line != kTrajectoryHeader) {
    throw IoError("bad_header", "trajectory CSV must start with '" + std::string(kTrajectoryHeader) + "'");
  }
  bool any_counts = false;
  while (next_line(line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 8) throw IoError("bad_row", "trajectory row needs 8 fields: '" + std::string(line) + "'");
    const double t = parse_double(f[0]);
    const auto group = static_cast<std::size_t>(parse_double(f[1]));
    if (group == 0) {
      traj.times.push_back(t);
      traj.counts_series.emplace_back();
      traj.pi_series.emplace_back();
      traj.theta_series.emplace_back();
      traj.a_series.emplace_back();
      traj.p_series.emplace_back();
      traj.chosen_series.push_back(
          f[7].empty() ? std::nullopt : std::optional<std::size_t>(static_cast<std::size_t>(parse_double(f[7]))));
    } else if (traj.times.empty() || traj.pi_series.back().size() != group) {
      throw IoError("bad_row", "trajectory rows out of group order");
    }
    if (!f[2].empty()) {
      any_counts = true;
      traj.counts_series.back().push_back(parse_double(f[2]));
    }
    traj.pi_series.back().push_back(parse_double(f[3]));
    traj.theta_series.back().push_back(parse_double(f[4]));
    traj.a_series.back().push_back(parse_double(f[5]));
    traj.p_series.back().push_back(parse_double(f[6]));
  }
  if (!any_counts) {
    traj.counts_series.clear();
    traj.process = ProcessKind::mean_field;
  } else {
    bool any_chosen = false;
    for (const auto& c : traj.chosen_series) any_chosen = any_chosen || c.has_value();
    traj.process = any_chosen ? ProcessKind::entrant : ProcessKind::redistribution;
  }
  return traj;
}

void write_text(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_failed", "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write_failed", "failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_failed", "cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  write_text(path, trajectory_csv(traj));
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  return parse_trajectory_csv(read_text(path));
}

json metadata_json(std::string_view command, const json& config) {
  return json{{"schema_version", kSchemaVersion},
              {"rng_algorithm", Rng::algorithm},
              {"command", command},
              {"config", config}};
}

json to_json(const FixedPointResult& r) {
  return json{{"pi_star", r.pi_star.pi},
              {"residual_norm", r.residual_norm},
              {"iterations", r.iterations},
              {"converged", r.converged}};
}

json to_json(const SpectralReport& r) {
  json normal = r.normal_mode >= 0 ? json(r.normal_mode) : json(nullptr);
  json vectors = json::array();
  for (Eigen::Index i = 0; i < r.decomposition.vectors.cols(); ++i) {
    vectors.push_back(complex_pairs(r.decomposition.vectors.col(i)));
  }
  json residuals = json::array();
  for (double v : r.decomposition.residuals) residuals.push_back(v);
  return json{{"point", r.point.pi},
              {"jacobian", matrix_rows(r.jacobian)},
              {"eigenvalues", complex_pairs(r.decomposition.values)},
              {"eigenvectors", vectors},
              {"residuals", residuals},
              {"normal_mode", normal},
              {"tangent_eigenvalues", complex_pairs(r.tangent)},
              {"classification", to_string(r.classification)}};
}

json to_json(const HessianDegeneracyReport& r) {
  return json{{"grid_n", r.grid_n},
              {"points", r.points},
              {"max_abs_det", r.max_abs_det},
              {"max_relative_det", r.max_relative_det},
              {"min_eigenvalue", r.min_eigenvalue},
              {"max_eigenvalue", r.max_eigenvalue},
              {"max_flat_residual_ratio", r.max_flat_residual_ratio},
              {"max_trace_identity_error", r.max_trace_identity_error},
              {"min_gradient_norm", r.min_gradient_norm},
              {"det_ok", r.det_ok},
              {"psd_ok", r.psd_ok},
              {"flat_ok", r.flat_ok},
              {"no_interior_critical_point", r.no_interior_critical_point},
              {"passed", r.passed()}};
}

json to_json(const SummaryTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"beta", r.beta}, {"seed", r.seed}, {"group", r.group}, {"initial", r.initial},
                    {"final", r.final_size}, {"final_pi", r.final_pi}, {"final_p", r.final_p}});
  }
  json cells = json::array();
  for (const auto& c : t.cells) {
    cells.push_back({{"beta", c.beta}, {"seed", c.seed}, {"initial_total", c.initial_total},
                     {"final_total", c.final_total}, {"max_min_ratio", c.stats.max_min_ratio},
                     {"max_share", c.stats.max_share}, {"gini", c.stats.gini}});
  }
  json aggregates = json::array();
  for (const auto& a : t.aggregates) {
    aggregates.push_back({{"beta", a.beta}, {"mean_max_min_ratio", a.mean_ratio},
                          {"mean_max_share", a.mean_max_share}, {"mean_gini", a.mean_gini}});
  }
  return json{{"scenario", to_string(t.scenario)},
              {"k_groups", t.k_groups},
              {"t_steps", t.t_steps},
              {"heuristic", t.heuristic},
              {"betas", t.betas},
              {"seeds", t.seeds},
              {"rows", rows},
              {"cells", cells},
              {"aggregates", aggregates}};
}

json to_json(const EnsembleSummary& s) {
  json runs = json::array();
  for (const auto& r : s.runs) {
    runs.push_back({{"seed", r.seed}, {"initial_counts", r.initial_counts}, {"final_counts", r.final_counts},
                    {"final_pi", r.final_pi}, {"final_p", r.final_p},
                    {"max_min_ratio", r.stats.max_min_ratio}, {"max_share", r.stats.max_share},
                    {"gini", r.stats.gini}});
  }
  return json{{"runs", runs}, {"mean_pi", s.mean_pi}, {"std_pi", s.std_pi}};
}

std::string summary_table_csv(const SummaryTable& t) {
  std::string out = "group";
  for (double b : t.betas) out += ",initial[" + beta_label(b) + "],final[" + beta_label(b) + "]";
  out += '\n';
  const std::size_t n_seed = t.seeds.size();
  for (std::size_t g = 0; g < t.k_groups; ++g) {
    out += std::to_string(g);
    for (std::size_t b = 0; b < t.betas.size(); ++b) {
      const SummaryRow& r = t.rows[(b * n_seed) * t.k_groups + g];
      out += ',' + format_double(r.initial) + ',' + format_double(r.final_size);
    }
    out += '\n';
  }
  out += "\nstatistic";
  for (double b : t.betas) out += ',' + beta_label(b);
  out += "\nseeds";
  for (std::size_t b = 0; b < t.betas.size(); ++b) out += ',' + std::to_string(n_seed);
  const auto stat_line = [&](const char* name, auto field) {
    out += '\n';
    out += name;
    for (const auto& a : t.aggregates) out += ',' + format_double(a.*field);
  };
  stat_line("mean_max_min_ratio", &BetaAggregate::mean_ratio);
  stat_line("mean_max_share", &BetaAggregate::mean_max_share);
  stat_line("mean_gini", &BetaAggregate::mean_gini);
  out += '\n';
  return out;
}

std::string summary_rows_csv(const SummaryTable& t) {
  std::string out = "beta,seed,group,initial,final,final_pi,final_p\n";
  for (const auto& r : t.rows) {
    out += format_double(r.beta) + ',' + std::to_string(r.seed) + ',' + std::to_string(r.group) + ',' +
           format_double(r.initial) + ',' + format_double(r.final_size) + ',' +
           format_double(r.final_pi) + ',' + format_double(r.final_p) + '\n';
  }
  return out;
}

std::string fixed_point_csv(const FixedPointResult& r) {
  std::string out = "group,pi_star\n";
  for (std::size_t k = 0; k < r.pi_star.size(); ++k) {
    out += std::to_string(k) + ',' + format_double(r.pi_star.pi[k]) + '\n';
  }
  return out;
}

std::string spectral_csv(const SpectralReport& r) {
  std::string out = "index,re,im,residual,mode\n";
  const auto& d = r.decomposition;
  for (Eigen::Index i = 0; i < d.values.size(); ++i) {
    out += std::to_string(i) + ',' + format_double(d.values(i).real()) + ',' +
           format_double(d.values(i).imag()) + ',' + format_double(d.residuals(i)) + ',' +
           (i == r.normal_mode ? "normal" : "tangent") + '\n';
  }
  return out;
}

std::string ensemble_csv(const EnsembleSummary& s) {
  std::string out = "seed,group,initial,final,final_pi,final_p\n";
  for (const auto& r : s.runs) {
    for (std::size_t g = 0; g < r.final_counts.size(); ++g) {
      out += std::to_string(r.seed) + ',' + std::to_string(g) + ',' + format_double(r.initial_counts[g]) +
             ',' + format_double(r.final_counts[g]) + ',' + format_double(r.final_pi[g]) + ',' +
             format_double(r.final_p[g]) + '\n';
    }
  }
  return out;
}

void write_document(const std::filesystem::path& path, const json& metadata, const json& payload) {
  write_text(path, json{{"metadata", metadata}, {"payload", payload}}.dump(2) + "\n");
}

void write_summary(const SummaryTable& table, const std::filesystem::path& path, SummaryFormat format,
                   const json& metadata) {
  if (format == SummaryFormat::csv) write_text(path, summary_table_csv(table));
  else write_document(path, metadata, to_json(table));
}

void write_summary(const FixedPointResult& result, const std::filesystem::path& path,
                   SummaryFormat format, const json& metadata) {
  if (format == SummaryFormat::csv) write_text(path, fixed_point_csv(result));
  else write_document(path, metadata, to_json(result));
}

void write_summary(const SpectralReport& report, const std::filesystem::path& path,
                   SummaryFormat format, const json& metadata) {
  if (format == SummaryFormat::csv) write_text(path, spectral_csv(report));
  else write_document(path, metadata, to_json(report));
}

}  // namespace groupform
