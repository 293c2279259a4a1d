#include "recurweight/harness.hpp"

#include "recurweight/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

namespace recurweight {

std::string_view to_string(CensoredAnalysis a) {
  switch (a) {
    case CensoredAnalysis::GapScale: return "gap-scale";
    case CensoredAnalysis::AtRisk: return "at-risk";
    case CensoredAnalysis::CompleteCase: return "complete-case";
  }
  return "unknown";
}

CensoredAnalysis parse_censored_analysis(std::string_view name) {
  if (name == "gap-scale") return CensoredAnalysis::GapScale;
  if (name == "at-risk") return CensoredAnalysis::AtRisk;
  if (name == "complete-case") return CensoredAnalysis::CompleteCase;
  throw std::invalid_argument("unknown analysis '" + std::string(name) + "'");
}

std::string_view to_string(Estimand e) {
  switch (e) {
    case Estimand::Event1: return "event1";
    case Estimand::Event2: return "event2";
    case Estimand::Pooled: return "pooled";
  }
  return "unknown";
}

Estimand parse_estimand(std::string_view name) {
  if (name == "event1") return Estimand::Event1;
  if (name == "event2") return Estimand::Event2;
  if (name == "pooled") return Estimand::Pooled;
  throw std::invalid_argument("unknown estimand '" + std::string(name) + "'");
}

const EventEstimate* ReplicateResult::estimate(Estimand e) const {
  if (!ok) return nullptr;
  switch (e) {
    case Estimand::Event1: return &event1;
    case Estimand::Event2: return &event2;
    case Estimand::Pooled: return pooled ? &*pooled : nullptr;
  }
  return nullptr;
}

SurvivalSample event_sample(int event, std::span<const SubjectRecord> subjects, const TreatmentWeights& tw,
                            const CensoringWeights* cw, std::optional<double> tau, CensoredAnalysis mode) {
  if (event != 1 && event != 2) throw std::invalid_argument("event_sample: event must be 1 or 2");
  if (tau && !cw) throw std::invalid_argument("event_sample: censoring weights required when tau is set");
  SurvivalSample out;
  out.reserve(subjects.size());
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const auto& s = subjects[i];
    const auto id = static_cast<std::int64_t>(i);
    if (event == 1) {
      if (!tau) {
        out.add(s.w1, true, s.z1, tw.sw1[i], id);
      } else if (mode != CensoredAnalysis::CompleteCase) {
        out.add(std::min(s.w1, *tau), s.delta1, s.z1, tw.sw1[i], id);
      } else if (s.delta1) {
        out.add(s.w1, true, s.z1, tw.sw1[i] * cw->sw1_dag[i], id);
      }
    } else {
      if (!tau) {
        out.add(s.w2, true, s.z2, tw.sw2[i], id);
      } else if (mode == CensoredAnalysis::GapScale) {
        if (s.delta1) out.add(std::min(s.w2, *tau), s.w2 <= *tau, s.z2, tw.sw2[i] * cw->sw1_dag[i], id);
      } else if (mode == CensoredAnalysis::AtRisk) {
        const double follow_up = std::min(s.w2, *tau - s.w1);
        if (s.delta1 && follow_up > 0.0) out.add(follow_up, s.delta2, s.z2, tw.sw2[i] * cw->sw1_dag[i], id);
      } else if (s.delta2) {
        out.add(s.w2, true, s.z2, tw.sw2[i] * cw->sw2_dag[i], id);
      }
    }
  }
  return out;
}

namespace {

EventEstimate to_estimate(const CoxFit& fit) { return {fit.log_hr, fit.naive_se, fit.robust_se}; }

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

ReplicateResult run_replicate(const ScenarioConfig& config, std::uint64_t seed, const AnalysisOptions& options) {
  ReplicateResult result;
  result.replicate_seed = seed;
  try {
    RngStream stream(seed, 0);
    const auto subjects = gen_dataset(config, stream);
    const TreatmentWeights tw = build_treatment_weights(subjects, config, options.weights);
    std::optional<CensoringWeights> cw;
    if (config.tau) cw = build_censoring_weights(subjects, config.scenario, *config.tau);
    const CensoringWeights* cwp = cw ? &*cw : nullptr;

    const SurvivalSample first = event_sample(1, subjects, tw, cwp, config.tau, options.censored);
    const SurvivalSample second = event_sample(2, subjects, tw, cwp, config.tau, options.censored);
    result.event1 = to_estimate(fit_weighted_cox(first));
    result.event2 = to_estimate(fit_weighted_cox(second));

    if (config.scenario == Scenario::IndependentGaps) {
      SurvivalSample both = first;
      both.reserve(first.size() + second.size());
      for (std::size_t k = 0; k < second.size(); ++k)
        both.add(second.time[k], second.event[k], second.treatment[k], second.weight[k], second.cluster[k]);
      result.pooled = to_estimate(fit_weighted_cox(both));
    }

    const double n = static_cast<double>(subjects.size());
    double z1 = 0, z2 = 0, cens1 = 0, cens2 = 0;
    for (const auto& s : subjects) {
      z1 += s.z1;
      z2 += s.z2;
      cens1 += 1 - s.delta1;
      cens2 += 1 - s.delta2;
    }
    auto& d = result.diagnostics;
    d["prevalence_z1"] = z1 / n;
    d["prevalence_z2"] = z2 / n;
    d["censored_fraction_1"] = cens1 / n;
    d["censored_fraction_2"] = cens2 / n;
    d["mean_sw1"] = mean_of(tw.sw1);
    d["mean_sw2"] = mean_of(tw.sw2);
    d["max_sw1"] = *std::max_element(tw.sw1.begin(), tw.sw1.end());
    d["max_sw2"] = *std::max_element(tw.sw2.begin(), tw.sw2.end());
    d["min_sw1"] = *std::min_element(tw.sw1.begin(), tw.sw1.end());
    d["min_sw2"] = *std::min_element(tw.sw2.begin(), tw.sw2.end());
    d["rows_event1"] = static_cast<double>(first.size());
    d["rows_event2"] = static_cast<double>(second.size());
    d["refit_treatment_on_observed"] = tw.refit_on_observed ? 1.0 : 0.0;
    result.ok = true;
  } catch (const NumericalError& e) {
    result.failure = e.what();
  } catch (const std::invalid_argument& e) {
    result.failure = e.what();
  }
  return result;
}

SummaryRow summarize(std::span<const ReplicateResult> results, double true_beta_m, Estimand estimand,
                     std::size_t n_subjects) {
  if (results.empty()) throw std::invalid_argument("summarize: no replicates");

  // Accumulate in replicate order so the row does not depend on input order.
  std::vector<const ReplicateResult*> ordered;
  ordered.reserve(results.size());
  for (const auto& r : results) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->replicate_index < b->replicate_index; });

  std::vector<const EventEstimate*> ok;
  for (const auto* r : ordered)
    if (const auto* e = r->estimate(estimand)) ok.push_back(e);
  if (ok.empty()) throw std::invalid_argument("summarize: no successful replicates");

  SummaryRow row;
  row.estimand = estimand;
  row.true_beta_m = true_beta_m;
  row.true_hr = std::exp(true_beta_m);
  row.n_subjects = n_subjects;
  row.n_reps = results.size();
  row.n_failed = results.size() - ok.size();

  const double r = static_cast<double>(ok.size());
  double sum_beta = 0.0, sum_naive = 0.0, sum_robust = 0.0;
  for (const auto* e : ok) {
    sum_beta += e->beta_hat;
    sum_naive += e->naive_se;
    sum_robust += e->robust_se;
  }
  row.mean_beta_hat = sum_beta / r;
  row.mean_hr = std::exp(row.mean_beta_hat);
  row.ase = sum_naive / r;
  row.rse = sum_robust / r;
  row.abs_bias = row.mean_beta_hat - true_beta_m;
  if (true_beta_m == 0.0) {
    row.bias_is_absolute = true;
    row.bias_pct = std::numeric_limits<double>::quiet_NaN();
  } else {
    row.bias_pct = row.abs_bias / true_beta_m * 100.0;
  }

  if (ok.size() < 2) {
    row.ese_defined = false;
    row.ese = std::numeric_limits<double>::quiet_NaN();
    row.ese_centered = std::numeric_limits<double>::quiet_NaN();
  } else {
    double ss_truth = 0.0, ss_mean = 0.0;
    for (const auto* e : ok) {
      ss_truth += (e->beta_hat - true_beta_m) * (e->beta_hat - true_beta_m);
      ss_mean += (e->beta_hat - row.mean_beta_hat) * (e->beta_hat - row.mean_beta_hat);
    }
    row.ese = std::sqrt(ss_truth / (r - 1.0));
    row.ese_centered = std::sqrt(ss_mean / (r - 1.0));
  }
  return row;
}

SummaryRow summarize(std::span<const ReplicateResult> results, const CalibrationEntry& truth, Scenario scenario,
                     Estimand estimand, std::size_t n_subjects) {
  const int event = estimand == Estimand::Event2 ? 2 : 1;
  return summarize(results, true_log_hr(truth, scenario, event), estimand, n_subjects);
}

const SummaryRow& SimulationResult::row(Estimand e) const {
  for (const auto& r : rows)
    if (r.estimand == e) return r;
  throw std::out_of_range("SimulationResult: no row for " + std::string(to_string(e)));
}

std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t index) {
  return mix_seed(master_seed, static_cast<std::uint64_t>(index));
}

unsigned resolve_thread_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RECURWEIGHT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SimulationResult run_simulation(const ScenarioConfig& config, const CalibrationEntry& truth, std::size_t n_reps,
                                std::uint64_t master_seed, const AnalysisOptions& options, unsigned threads) {
  if (n_reps == 0) throw std::invalid_argument("run_simulation: n_reps must be positive");
  ScenarioConfig cfg = config;
  cfg.beta_c = truth.beta_c;
  cfg.validate();

  SimulationResult out;
  out.replicates.resize(n_reps);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    try {
      for (std::size_t j = next++; j < n_reps && !failed; j = next++) {
        ReplicateResult r = run_replicate(cfg, replicate_seed(master_seed, j), options);
        r.replicate_index = j;
        out.replicates[j] = std::move(r);
      }
    } catch (...) {
      if (!failed.exchange(true)) error = std::current_exception();
    }
  };

  const unsigned workers = std::min<std::size_t>(resolve_thread_count(threads), n_reps);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  const auto n_failed = static_cast<std::size_t>(
      std::count_if(out.replicates.begin(), out.replicates.end(), [](const auto& r) { return !r.ok; }));
  if (static_cast<double>(n_failed) > 0.05 * static_cast<double>(n_reps)) {
    std::string first_reason;
    for (const auto& r : out.replicates)
      if (!r.ok) {
        first_reason = r.failure;
        break;
      }
    throw SimulationAborted("run_simulation: " + std::to_string(n_failed) + " of " + std::to_string(n_reps) +
                            " replicates failed (first: " + first_reason + ")");
  }

  std::vector<Estimand> estimands{Estimand::Event1, Estimand::Event2};
  if (cfg.scenario == Scenario::IndependentGaps) estimands.push_back(Estimand::Pooled);
  for (Estimand e : estimands)
    out.rows.push_back(summarize(out.replicates, truth, cfg.scenario, e, cfg.n_subjects));
  return out;
}

}  // namespace recurweight
