#pragma once

#include "recurweight/calibrate.hpp"
#include "recurweight/coxfit.hpp"
#include "recurweight/iptw.hpp"
#include "recurweight/simgen.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace recurweight {

// How gap times are analysed when tau is set.
enum class CensoredAnalysis {
  // Each gap is followed for at most tau on its own time scale. Gap 1 uses
  // everyone (weight sw1); gap 2 uses subjects with delta1 = 1, event
  // I(w2 <= tau), weighted by sw2 * sw1_dag.
  GapScale,
  // Calendar window: gap 1 is followed until tau, gap 2 (delta1 = 1) until
  // tau - w1 with event delta2, weighted by sw2 * sw1_dag.
  AtRisk,
  // Only subjects with an observed event j, weighted by sw_j * sw_j_dag.
  CompleteCase,
};

std::string_view to_string(CensoredAnalysis a);
CensoredAnalysis parse_censored_analysis(std::string_view name);

enum class Estimand { Event1, Event2, Pooled };

std::string_view to_string(Estimand e);
Estimand parse_estimand(std::string_view name);

struct AnalysisOptions {
  CensoredAnalysis censored = CensoredAnalysis::GapScale;
  WeightOptions weights;
};

struct EventEstimate {
  double beta_hat = 0.0;
  double naive_se = 0.0;
  double robust_se = 0.0;
};

struct ReplicateResult {
  std::size_t replicate_index = 0;
  std::uint64_t replicate_seed = 0;
  bool ok = false;
  std::string failure;
  EventEstimate event1;
  EventEstimate event2;
  std::optional<EventEstimate> pooled;  // independent gaps only: both gaps in one fit
  std::map<std::string, double> diagnostics;

  const EventEstimate* estimate(Estimand e) const;
};

struct SummaryRow {
  Estimand estimand = Estimand::Event2;
  double true_beta_m = 0.0;
  double true_hr = 1.0;
  double mean_beta_hat = 0.0;
  double mean_hr = 1.0;
  double bias_pct = 0.0;   // NaN when true_beta_m == 0
  double abs_bias = 0.0;   // mean_beta_hat - true_beta_m
  bool bias_is_absolute = false;
  double ase = 0.0;
  double ese = 0.0;           // around the truth, (R - 1) denominator
  double ese_centered = 0.0;  // around the replicate mean
  bool ese_defined = true;
  double rse = 0.0;
  std::size_t n_subjects = 0;
  std::size_t n_reps = 0;
  std::size_t n_failed = 0;

  bool operator==(const SummaryRow&) const = default;
};

class SimulationAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Survival rows for one event of a generated dataset, per the analysis mode.
// Row cluster ids are subject indices.
SurvivalSample event_sample(int event, std::span<const SubjectRecord> subjects, const TreatmentWeights& tw,
                            const CensoringWeights* cw, std::optional<double> tau, CensoredAnalysis mode);

/// Generate, weight and fit one dataset. Never throws for numerical failures:
/// those mark the result as failed with the reason attached.
ReplicateResult run_replicate(const ScenarioConfig& config, std::uint64_t replicate_seed,
                              const AnalysisOptions& options = {});

SummaryRow summarize(std::span<const ReplicateResult> results, double true_beta_m, Estimand estimand,
                     std::size_t n_subjects = 0);

SummaryRow summarize(std::span<const ReplicateResult> results, const CalibrationEntry& truth, Scenario scenario,
                     Estimand estimand, std::size_t n_subjects = 0);

struct SimulationResult {
  std::vector<SummaryRow> rows;  // event 1, event 2, then pooled for independent gaps
  std::vector<ReplicateResult> replicates;

  const SummaryRow& row(Estimand e) const;
};

std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t index);

// Worker count: `requested` if positive, else RECURWEIGHT_THREADS, else the
// hardware concurrency.
unsigned resolve_thread_count(unsigned requested = 0);

/// Runs `n_reps` replicates of `config` with beta_c taken from `truth`.
/// Replicate j uses replicate_seed(master_seed, j); results are aggregated in
/// replicate order, so output does not depend on the worker count. Throws
/// SimulationAborted when more than 5% of replicates fail.
SimulationResult run_simulation(const ScenarioConfig& config, const CalibrationEntry& truth, std::size_t n_reps,
                                std::uint64_t master_seed, const AnalysisOptions& options = {},
                                unsigned threads = 0);

}  // namespace recurweight
