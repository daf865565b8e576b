#pragma once

// Bit-stable text serialization: CSV tables with shortest round-trip decimals
// and self-describing JSON documents (metadata + payload).

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "groupform/experiments.hpp"
#include "groupform/meanfield.hpp"
#include "groupform/sim.hpp"
#include "groupform/spectral.hpp"

namespace groupform {

inline constexpr std::string_view kSchemaVersion = "1.0";

/// Shortest decimal that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Header `t,group,n,pi,theta,a,p,chosen`, one row per (record, group).
/// `n` is empty for mean-field trajectories; `chosen` holds the group the
/// latest entrant joined and is empty outside the entrant process and at t = 0.
std::string trajectory_csv(const Trajectory& traj);
Trajectory parse_trajectory_csv(std::string_view text);

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

/// Metadata block embedded in every structured document.
nlohmann::json metadata_json(std::string_view command, const nlohmann::json& config);

nlohmann::json to_json(const FixedPointResult& result);
nlohmann::json to_json(const SpectralReport& report);
nlohmann::json to_json(const HessianDegeneracyReport& report);
nlohmann::json to_json(const SummaryTable& table);
nlohmann::json to_json(const EnsembleSummary& summary);

/// Initial/final columns per beta for the first seed, then a blank line and
/// a statistics block aggregated over all seeds.
std::string summary_table_csv(const SummaryTable& table);
/// Long form: one row per (beta, seed, group).
std::string summary_rows_csv(const SummaryTable& table);
std::string fixed_point_csv(const FixedPointResult& result);
std::string spectral_csv(const SpectralReport& report);
std::string ensemble_csv(const EnsembleSummary& summary);

enum class SummaryFormat { csv, structured };

/// CSV writes the table body only; structured writes {"metadata", "payload"}.
void write_summary(const SummaryTable& table, const std::filesystem::path& path, SummaryFormat format,
                   const nlohmann::json& metadata);
void write_summary(const FixedPointResult& result, const std::filesystem::path& path,
                   SummaryFormat format, const nlohmann::json& metadata);
void write_summary(const SpectralReport& report, const std::filesystem::path& path,
                   SummaryFormat format, const nlohmann::json& metadata);

/// Serializes {"metadata": ..., "payload": ...} with a trailing newline.
void write_document(const std::filesystem::path& path, const nlohmann::json& metadata,
                    const nlohmann::json& payload);

}  // namespace groupform
