#pragma once

#include "recurweight/calibrate.hpp"
#include "recurweight/cli.hpp"
#include "recurweight/harness.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace recurweight {

// One line of a simulation results table.
struct TableRow {
  std::string scenario;
  double prevalence = 0.25;
  std::optional<double> tau;
  SummaryRow summary;
  std::uint64_t seed = 0;
};

inline constexpr const char* kSummaryCsvHeader =
    "scenario,prevalence,tau,true_log_hr,true_hr,est_log_hr,est_hr,bias_pct,ase,ese,rse,n,reps,seed,failed";

inline constexpr const char* kCalibrationCsvHeader =
    "true_log_hr_m1,true_hr_m1,true_log_hr_c,true_log_hr_m2,true_hr_m2";

std::string render_table(std::span<const TableRow> rows, OutputFormat format, const RunManifest& manifest);
std::string render_calibration(std::span<const CalibrationEntry> entries, OutputFormat format,
                               const RunManifest& manifest);

// Manifest as '# '-prefixed lines (CSV / markdown header).
std::string manifest_comment(const RunManifest& manifest);
nlohmann::json manifest_json(const RunManifest& manifest);

nlohmann::json to_json(const TableRow& row);
TableRow table_row_from_json(const nlohmann::json& j);
// Rows of a document produced by render_table(..., OutputFormat::Json, ...).
std::vector<TableRow> parse_table_json(const std::string& text);

/// Renders and writes rows. An empty path writes to stdout. Throws
/// std::invalid_argument on empty rows and std::runtime_error (naming the
/// path) on I/O failure.
void emit_table(std::span<const TableRow> rows, OutputFormat format, const std::string& path,
                const RunManifest& manifest);

void write_output(const std::string& path, const std::string& content);

}  // namespace recurweight
