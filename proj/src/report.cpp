#include "recurweight/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace recurweight {

using nlohmann::json;

namespace {

std::string fixed4(double v) {
  if (std::isnan(v)) return "NA";
  const std::string s = fmt::format("{:.4f}", v);
  return s == "-0.0000" ? "0.0000" : s;
}

std::string bias_cell(const SummaryRow& r) {
  if (r.bias_is_absolute) return "abs:" + fixed4(r.abs_bias);
  return fixed4(r.bias_pct);
}

std::string quote_arg(const std::string& a) {
  if (a.find_first_of(" \t\"'") == std::string::npos && !a.empty()) return a;
  return "'" + a + "'";
}

json nan_to_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double null_to_nan(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

std::string render_csv(std::span<const TableRow> rows, const RunManifest& manifest) {
  std::ostringstream out;
  out << manifest_comment(manifest) << kSummaryCsvHeader << '\n';
  for (const auto& row : rows) {
    const auto& s = row.summary;
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", row.scenario, fixed4(row.prevalence),
                       row.tau ? fixed4(*row.tau) : std::string(), fixed4(s.true_beta_m), fixed4(s.true_hr),
                       fixed4(s.mean_beta_hat), fixed4(s.mean_hr), bias_cell(s), fixed4(s.ase),
                       s.ese_defined ? fixed4(s.ese) : "NA", fixed4(s.rse), s.n_subjects, s.n_reps, row.seed,
                       s.n_failed);
  }
  return out.str();
}

std::string render_markdown(std::span<const TableRow> rows, const RunManifest& manifest) {
  std::ostringstream out;
  out << manifest_comment(manifest) << '\n';
  std::string current_group;
  for (const auto& row : rows) {
    const auto& s = row.summary;
    const std::string group =
        fmt::format("{}, estimand {}, Prevalence = {:g}%{}, sample size = {}", row.scenario, to_string(s.estimand),
                    row.prevalence * 100.0, row.tau ? fmt::format(", tau = {:g}", *row.tau) : std::string(),
                    s.n_subjects);
    if (group != current_group) {
      if (!current_group.empty()) out << '\n';
      current_group = group;
      out << "**" << group << ":**\n\n"
          << "| True log marginal HR | True marginal HR | Estimated log marginal HR | Estimated marginal HR "
             "| Avg Bias | ASE | ESE | RSE |\n"
          << "|---|---|---|---|---|---|---|---|\n";
    }
    const std::string bias =
        s.bias_is_absolute ? fixed4(s.abs_bias) + " (abs)" : fmt::format("{:.2f}%", s.bias_pct);
    out << fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} |\n", fixed4(s.true_beta_m), fixed4(s.true_hr),
                       fixed4(s.mean_beta_hat), fixed4(s.mean_hr), bias, fixed4(s.ase),
                       s.ese_defined ? fixed4(s.ese) : "NA", fixed4(s.rse));
  }
  return out.str();
}

}  // namespace

std::string manifest_comment(const RunManifest& m) {
  std::string cmd = "recurweight";
  for (const auto& a : manifest_to_args(m)) cmd += " " + quote_arg(a);
  std::ostringstream out;
  out << "# " << cmd << '\n';
  const json j = manifest_json(m);
  for (const auto& [key, value] : j.items()) {
    if (key == "config") {
      for (const auto& [ck, cv] : value.items()) out << "# config." << ck << '=' << cv.dump() << '\n';
    } else {
      out << "# " << key << '=' << value.dump() << '\n';
    }
  }
  return out.str();
}

json manifest_json(const RunManifest& m) {
  const auto& c = m.config;
  json config = {
      {"scenario", to_string(c.scenario)},
      {"n_subjects", c.n_subjects},
      {"alpha0", c.alpha0},
      {"alpha1", c.alpha1},
      {"gamma0", c.gamma0},
      {"gamma1", c.gamma1},
      {"gamma2", c.gamma2},
      {"beta1", c.beta1},
      {"beta_c", c.beta_c},
      {"baseline_rate", c.baseline_rate},
      {"drift_sd", c.drift_sd},
      {"tau", c.tau ? json(*c.tau) : json(nullptr)},
  };
  return {
      {"args", manifest_to_args(m)},
      {"command", to_string(m.command)},
      {"config", config},
      {"prevalence", m.prevalence},
      {"target_hrs", m.target_hrs},
      {"n_reps", m.n_reps},
      {"master_seed", m.master_seed},
      {"output_format", to_string(m.format)},
      {"output_path", m.output_path},
      {"recalibrate", m.recalibrate},
      {"oracle_n", m.oracle_n},
      {"tolerance", m.tolerance},
      {"analysis", to_string(m.analysis)},
      {"estimand", to_string(m.estimand)},
      {"truncation", m.truncation ? json(*m.truncation) : json(nullptr)},
      {"refit_treatment_on_observed", m.refit_on_observed},
  };
}

json to_json(const TableRow& row) {
  const auto& s = row.summary;
  return {
      {"scenario", row.scenario},
      {"prevalence", row.prevalence},
      {"tau", row.tau ? json(*row.tau) : json(nullptr)},
      {"estimand", to_string(s.estimand)},
      {"true_log_hr", s.true_beta_m},
      {"true_hr", s.true_hr},
      {"est_log_hr", s.mean_beta_hat},
      {"est_hr", s.mean_hr},
      {"bias_pct", nan_to_null(s.bias_pct)},
      {"abs_bias", s.abs_bias},
      {"bias_is_absolute", s.bias_is_absolute},
      {"ase", s.ase},
      {"ese", nan_to_null(s.ese)},
      {"ese_centered", nan_to_null(s.ese_centered)},
      {"ese_defined", s.ese_defined},
      {"rse", s.rse},
      {"n", s.n_subjects},
      {"reps", s.n_reps},
      {"seed", row.seed},
      {"failed", s.n_failed},
  };
}

TableRow table_row_from_json(const json& j) {
  TableRow row;
  row.scenario = j.at("scenario").get<std::string>();
  row.prevalence = j.at("prevalence").get<double>();
  if (!j.at("tau").is_null()) row.tau = j.at("tau").get<double>();
  row.seed = j.at("seed").get<std::uint64_t>();
  auto& s = row.summary;
  s.estimand = parse_estimand(j.at("estimand").get<std::string>());
  s.true_beta_m = j.at("true_log_hr").get<double>();
  s.true_hr = j.at("true_hr").get<double>();
  s.mean_beta_hat = j.at("est_log_hr").get<double>();
  s.mean_hr = j.at("est_hr").get<double>();
  s.bias_pct = null_to_nan(j.at("bias_pct"));
  s.abs_bias = j.at("abs_bias").get<double>();
  s.bias_is_absolute = j.at("bias_is_absolute").get<bool>();
  s.ase = j.at("ase").get<double>();
  s.ese = null_to_nan(j.at("ese"));
  s.ese_centered = null_to_nan(j.at("ese_centered"));
  s.ese_defined = j.at("ese_defined").get<bool>();
  s.rse = j.at("rse").get<double>();
  s.n_subjects = j.at("n").get<std::size_t>();
  s.n_reps = j.at("reps").get<std::size_t>();
  s.n_failed = j.at("failed").get<std::size_t>();
  return row;
}

std::vector<TableRow> parse_table_json(const std::string& text) {
  const json doc = json::parse(text);
  std::vector<TableRow> rows;
  for (const auto& r : doc.at("rows")) rows.push_back(table_row_from_json(r));
  return rows;
}

std::string render_table(std::span<const TableRow> rows, OutputFormat format, const RunManifest& manifest) {
  if (rows.empty()) throw std::invalid_argument("render_table: no rows");
  switch (format) {
    case OutputFormat::Csv: return render_csv(rows, manifest);
    case OutputFormat::Markdown: return render_markdown(rows, manifest);
    case OutputFormat::Json: {
      json doc = {{"manifest", manifest_json(manifest)}, {"rows", json::array()}};
      for (const auto& r : rows) doc["rows"].push_back(to_json(r));
      return doc.dump(2) + "\n";
    }
  }
  throw std::invalid_argument("render_table: unknown format");
}

std::string render_calibration(std::span<const CalibrationEntry> entries, OutputFormat format,
                               const RunManifest& manifest) {
  if (entries.empty()) throw std::invalid_argument("render_calibration: no entries");
  std::ostringstream out;
  switch (format) {
    case OutputFormat::Csv:
      out << manifest_comment(manifest) << kCalibrationCsvHeader << '\n';
      for (const auto& e : entries)
        out << fmt::format("{},{},{},{},{}\n", fixed4(e.beta_m1), fixed4(std::exp(e.beta_m1)), fixed4(e.beta_c),
                           fixed4(e.beta_m2), fixed4(std::exp(e.beta_m2)));
      return out.str();
    case OutputFormat::Markdown:
      out << manifest_comment(manifest) << '\n'
          << "| True log marginal HR (event 1) | True marginal HR (event 1) | True log conditional HR "
             "| True log marginal HR (event 2) | True marginal HR (event 2) |\n"
          << "|---|---|---|---|---|\n";
      for (const auto& e : entries)
        out << fmt::format("| {} | {} | {} | {} | {} |\n", fixed4(e.beta_m1), fixed4(std::exp(e.beta_m1)),
                           fixed4(e.beta_c), fixed4(e.beta_m2), fixed4(std::exp(e.beta_m2)));
      return out.str();
    case OutputFormat::Json: {
      json doc = {{"manifest", manifest_json(manifest)}, {"entries", json::array()}};
      for (const auto& e : entries)
        doc["entries"].push_back({{"beta_m1", e.beta_m1},
                                  {"hr_m1", std::exp(e.beta_m1)},
                                  {"beta_c", e.beta_c},
                                  {"beta_m2", e.beta_m2},
                                  {"hr_m2", std::exp(e.beta_m2)},
                                  {"achieved_beta_m1", e.achieved_beta_m1},
                                  {"oracle_n", e.oracle_n},
                                  {"tolerance", e.tolerance}});
      return doc.dump(2) + "\n";
    }
  }
  throw std::invalid_argument("render_calibration: unknown format");
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content << std::flush;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  file << content;
  file.flush();
  if (!file) throw std::runtime_error("write to '" + path + "' failed");
}

void emit_table(std::span<const TableRow> rows, OutputFormat format, const std::string& path,
                const RunManifest& manifest) {
  write_output(path, render_table(rows, format, manifest));
}

}  // namespace recurweight
