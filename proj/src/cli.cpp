#include "recurweight/cli.hpp"

#include "recurweight/calibrate.hpp"
#include "recurweight/error.hpp"
#include "recurweight/report.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace recurweight {

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Calibrate: return "calibrate";
    case Command::Simulate: return "simulate";
    case Command::Generate: return "generate";
  }
  return "unknown";
}

std::string_view to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Markdown: return "md";
    case OutputFormat::Json: return "json";
  }
  return "unknown";
}

AnalysisOptions RunManifest::analysis_options() const {
  AnalysisOptions o;
  o.censored = analysis;
  o.weights.refit_on_observed = refit_on_observed;
  o.weights.truncation = truncation;
  return o;
}

namespace {

struct RawOptions {
  std::string scenario;
  std::size_t n = 10000;
  std::size_t reps = 1000;
  double prevalence = 0.25;
  std::string targets;
  std::optional<double> tau;
  std::uint64_t seed = 20200101;
  std::string format = "csv";
  std::string out;
  bool recalibrate = false;
  std::size_t oracle_n = 1'000'000;
  double tolerance = 0.005;
  std::string analysis = "gap-scale";
  std::string estimand = "event2";
  std::optional<double> truncate;
  bool no_refit = false;
};

void add_options(CLI::App& sub, RawOptions& o) {
  sub.add_option("--scenario", o.scenario, "independent | tv-covariates | tv-treatment");
  sub.add_option("--n", o.n, "subjects per dataset");
  sub.add_option("--reps", o.reps, "Monte Carlo replicates");
  sub.add_option("--prevalence", o.prevalence, "treatment prevalence, 0.25 or 0.5");
  sub.add_option("--target-hr,--targets", o.targets, "comma-separated marginal hazard ratios");
  sub.add_option("--tau", o.tau, "administrative censoring time");
  sub.add_option("--seed", o.seed, "master seed");
  sub.add_option("--format", o.format, "csv | md | json");
  sub.add_option("--out", o.out, "output path (stdout when omitted)");
  sub.add_flag("--recalibrate", o.recalibrate, "recompute the conditional effects instead of the cached table");
  sub.add_option("--oracle-n", o.oracle_n, "population size of the marginal-HR oracle");
  sub.add_option("--tolerance", o.tolerance, "calibration tolerance on the marginal log HR");
  sub.add_option("--analysis", o.analysis, "censored analysis: gap-scale | at-risk | complete-case");
  sub.add_option("--estimand", o.estimand, "reported fit: event1 | event2 | pooled");
  sub.add_option("--truncate", o.truncate, "percentile weight truncation, e.g. 0.01");
  sub.add_flag("--no-refit", o.no_refit, "reuse full-sample propensity fits under censoring");
}

std::vector<double> parse_targets(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("--target-hr: '" + item + "' is not a number");
    }
    if (used != item.size()) throw UsageError("--target-hr: '" + item + "' is not a number");
    if (!(v >= 1.0) || !std::isfinite(v)) throw UsageError("--target-hr: hazard ratios must be >= 1");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--target-hr: empty list");
  return out;
}

OutputFormat parse_format(const std::string& f) {
  if (f == "csv") return OutputFormat::Csv;
  if (f == "md") return OutputFormat::Markdown;
  if (f == "json") return OutputFormat::Json;
  throw UsageError("--format must be csv, md or json");
}

RunManifest build_manifest(Command command, const RawOptions& o, const CLI::App& sub) {
  RunManifest m;
  m.command = command;
  const bool has_scenario = sub.count("--scenario") > 0;

  if (o.tau && !has_scenario) throw UsageError("--tau requires --scenario");
  if (o.tau && !(*o.tau > 0.0 && std::isfinite(*o.tau))) throw UsageError("--tau must be a positive number");
  if (command != Command::Calibrate && !has_scenario)
    throw UsageError(std::string(to_string(command)) + " requires --scenario");
  if (command == Command::Calibrate && o.tau) throw UsageError("calibrate does not take --tau");
  if (o.prevalence != 0.25 && o.prevalence != 0.5) throw UsageError("--prevalence must be 0.25 or 0.5");
  if (o.n < 2) throw UsageError("--n must be at least 2");
  if (o.reps < 1) throw UsageError("--reps must be at least 1");
  if (o.oracle_n < 100000) throw UsageError("--oracle-n must be at least 100000");
  if (!(o.tolerance > 0.0)) throw UsageError("--tolerance must be positive");
  if (o.truncate && !(*o.truncate > 0.0 && *o.truncate < 0.5)) throw UsageError("--truncate must lie in (0, 0.5)");

  Scenario scenario = Scenario::TVCovariates;
  if (has_scenario) {
    try {
      scenario = parse_scenario(o.scenario);
    } catch (const std::invalid_argument&) {
      throw UsageError("--scenario must be independent, tv-covariates or tv-treatment");
    }
  }
  m.config = ScenarioConfig::for_prevalence(scenario, o.prevalence);
  m.config.n_subjects = o.n;
  m.config.tau = o.tau;
  m.prevalence = o.prevalence;
  if (!o.targets.empty()) m.target_hrs = parse_targets(o.targets);
  m.n_reps = o.reps;
  m.master_seed = o.seed;
  m.format = parse_format(o.format);
  if (command == Command::Generate && m.format != OutputFormat::Csv)
    throw UsageError("generate only writes csv");
  m.output_path = o.out;
  m.recalibrate = o.recalibrate;
  m.oracle_n = o.oracle_n;
  m.tolerance = o.tolerance;
  try {
    m.analysis = parse_censored_analysis(o.analysis);
    m.estimand = parse_estimand(o.estimand);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (m.estimand == Estimand::Pooled && scenario != Scenario::IndependentGaps)
    throw UsageError("--estimand pooled is only available for the independent scenario");
  m.truncation = o.truncate;
  m.refit_on_observed = !o.no_refit;
  return m;
}

std::string fmt_real(double v) { return fmt::format("{}", v); }

}  // namespace

RunManifest parse_args(std::span<const std::string> args) {
  CLI::App app{"Stabilized IPTW for two-gap-time recurrent events"};
  app.require_subcommand(1);
  RawOptions opts;
  CLI::App* calibrate = app.add_subcommand("calibrate", "solve for the conditional log HRs behind target marginal HRs");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo bias / ASE / ESE / RSE");
  CLI::App* generate = app.add_subcommand("generate", "dump one simulated dataset as CSV");
  for (CLI::App* sub : {calibrate, simulate, generate}) add_options(*sub, opts);

  std::vector<std::string> storage{"recurweight"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (calibrate->parsed()) return build_manifest(Command::Calibrate, opts, *calibrate);
  if (simulate->parsed()) return build_manifest(Command::Simulate, opts, *simulate);
  return build_manifest(Command::Generate, opts, *generate);
}

RunManifest parse_args(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_args(args);
}

std::vector<std::string> manifest_to_args(const RunManifest& m) {
  std::vector<std::string> a{std::string(to_string(m.command))};
  auto add = [&](const char* flag, std::string value) {
    a.emplace_back(flag);
    a.push_back(std::move(value));
  };
  add("--scenario", std::string(to_string(m.config.scenario)));
  add("--n", std::to_string(m.config.n_subjects));
  add("--reps", std::to_string(m.n_reps));
  add("--prevalence", fmt_real(m.prevalence));
  std::string targets;
  for (double t : m.target_hrs) targets += (targets.empty() ? "" : ",") + fmt_real(t);
  add("--target-hr", targets);
  if (m.config.tau) add("--tau", fmt_real(*m.config.tau));
  add("--seed", std::to_string(m.master_seed));
  add("--format", std::string(to_string(m.format)));
  if (!m.output_path.empty()) add("--out", m.output_path);
  if (m.recalibrate) a.emplace_back("--recalibrate");
  add("--oracle-n", std::to_string(m.oracle_n));
  add("--tolerance", fmt_real(m.tolerance));
  add("--analysis", std::string(to_string(m.analysis)));
  add("--estimand", std::string(to_string(m.estimand)));
  if (m.truncation) add("--truncate", fmt_real(*m.truncation));
  if (!m.refit_on_observed) a.emplace_back("--no-refit");
  return a;
}

std::string usage() {
  return "usage: recurweight {calibrate|simulate|generate} [options]\n"
         "  --scenario {independent|tv-covariates|tv-treatment}\n"
         "  --n <subjects>  --reps <replicates>  --prevalence {0.25|0.5}\n"
         "  --target-hr <hr,hr,...>  --tau <time>  --seed <u64>\n"
         "  --format {csv|md|json}  --out <path>  --recalibrate  --oracle-n <n>\n"
         "  --tolerance <t>  --analysis {gap-scale|at-risk|complete-case}  --estimand {event1|event2|pooled}\n"
         "  --truncate <q>  --no-refit\n"
         "environment: RECURWEIGHT_THREADS caps the worker count\n";
}

namespace {

CalibrationEntry truth_for(double hr, const RunManifest& m, std::ostream& log) {
  if (!m.recalibrate)
    if (const CalibrationEntry* cached = find_reference_entry(hr)) return *cached;
  log << fmt::format("calibrating target HR {} (oracle n = {})\n", hr, m.oracle_n);
  ScenarioConfig base = m.config;
  base.tau.reset();
  return calibrate_beta_c(std::log(hr), m.tolerance, base, m.oracle_n, m.master_seed);
}

int run_calibrate(const RunManifest& m, std::ostream& log) {
  std::vector<double> hrs = m.target_hrs;
  std::sort(hrs.begin(), hrs.end());
  std::vector<CalibrationEntry> entries;
  for (double hr : hrs) {
    log << fmt::format("calibrating target HR {} (oracle n = {})\n", hr, m.oracle_n);
    entries.push_back(calibrate_beta_c(std::log(hr), m.tolerance, m.config, m.oracle_n, m.master_seed));
  }
  write_output(m.output_path, render_calibration(entries, m.format, m));
  return 0;
}

int run_simulate(const RunManifest& m, std::ostream& log) {
  std::vector<TableRow> rows;
  for (double hr : m.target_hrs) {
    const CalibrationEntry truth = truth_for(hr, m, log);
    log << fmt::format("simulating {} HR {} (beta_c = {:.4f}), {} x {} subjects\n", to_string(m.config.scenario),
                       hr, truth.beta_c, m.n_reps, m.config.n_subjects);
    const SimulationResult sim = run_simulation(m.config, truth, m.n_reps, m.master_seed, m.analysis_options());
    TableRow row;
    row.scenario = std::string(to_string(m.config.scenario));
    row.prevalence = m.prevalence;
    row.tau = m.config.tau;
    row.summary = sim.row(m.estimand);
    row.seed = m.master_seed;
    rows.push_back(row);
  }
  emit_table(rows, m.format, m.output_path, m);
  return 0;
}

int run_generate(const RunManifest& m, std::ostream& log) {
  const CalibrationEntry truth = truth_for(m.target_hrs.front(), m, log);
  ScenarioConfig config = m.config;
  config.beta_c = truth.beta_c;
  RngStream stream(m.master_seed, 0);
  const auto subjects = gen_dataset(config, stream);
  std::ostringstream out;
  out << manifest_comment(m);
  write_dataset_csv(out, subjects);
  write_output(m.output_path, out.str());
  return 0;
}

}  // namespace

int run_command(const RunManifest& manifest, std::ostream& log) {
  try {
    switch (manifest.command) {
      case Command::Calibrate: return run_calibrate(manifest, log);
      case Command::Simulate: return run_simulate(manifest, log);
      case Command::Generate: return run_generate(manifest, log);
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace recurweight
