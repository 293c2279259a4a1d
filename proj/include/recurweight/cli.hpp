#pragma once

#include "recurweight/harness.hpp"
#include "recurweight/simgen.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace recurweight {

enum class Command { Calibrate, Simulate, Generate };
enum class OutputFormat { Csv, Markdown, Json };

std::string_view to_string(Command c);
std::string_view to_string(OutputFormat f);

// Everything needed to re-run a command; embedded in every emitted file.
struct RunManifest {
  Command command = Command::Simulate;
  ScenarioConfig config;
  double prevalence = 0.25;
  std::vector<double> target_hrs{1.0, 1.5, 2.0, 2.5, 3.0};
  std::size_t n_reps = 1000;
  std::uint64_t master_seed = 20200101;
  OutputFormat format = OutputFormat::Csv;
  std::string output_path;  // empty writes to stdout
  bool recalibrate = false;
  std::size_t oracle_n = 1'000'000;
  double tolerance = 0.005;
  CensoredAnalysis analysis = CensoredAnalysis::GapScale;
  Estimand estimand = Estimand::Event2;
  std::optional<double> truncation;
  bool refit_on_observed = true;

  AnalysisOptions analysis_options() const;
  bool operator==(const RunManifest&) const = default;
};

// Arguments exclude the program name. Throws UsageError with a readable
// message on unknown flags, out-of-range values or inconsistent combinations.
RunManifest parse_args(std::span<const std::string> args);
RunManifest parse_args(int argc, const char* const* argv);

// Canonical argument list reproducing `m` through parse_args.
std::vector<std::string> manifest_to_args(const RunManifest& m);

// Usage text for --help and errors.
std::string usage();

// Executes the manifest; progress goes to `log`. Returns the process exit code.
int run_command(const RunManifest& manifest, std::ostream& log);

}  // namespace recurweight
