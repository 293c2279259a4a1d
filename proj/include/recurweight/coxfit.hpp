#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace recurweight {

// Rows of a single-covariate survival fit. Each row is one gap time; rows of
// the same subject share a cluster id.
struct SurvivalSample {
  std::vector<double> time;
  std::vector<std::uint8_t> event;
  std::vector<std::uint8_t> treatment;
  std::vector<double> weight;
  std::vector<std::int64_t> cluster;

  std::size_t size() const { return time.size(); }
  void reserve(std::size_t n);
  void add(double t, bool d, bool z, double w, std::int64_t id);

  // Throws std::invalid_argument on ragged columns, non-positive times or
  // negative / non-finite weights.
  void validate() const;
};

struct CoxFit {
  double log_hr = 0.0;
  double naive_se = 0.0;
  double robust_se = 0.0;
  double score = 0.0;        // at log_hr
  double information = 0.0;  // observed, at log_hr
  int n_iter = 0;
  bool converged = false;
};

struct CoxOptions {
  int max_iter = 50;
  int max_halvings = 10;
  double score_tolerance = 1e-9;
  double step_tolerance = 1e-10;
  double divergence_bound = 20.0;
  bool robust = true;  // skip the sandwich when only the point estimate is needed
};

// Breslow weighted log partial likelihood with its first two derivatives.
struct PartialLikelihood {
  double loglik = 0.0;
  double score = 0.0;
  double information = 0.0;
};

double partial_loglik(double beta, const SurvivalSample& sample);

PartialLikelihood partial_likelihood_derivatives(double beta, const SurvivalSample& sample);

/// Newton-Raphson with step halving on the weighted partial likelihood.
/// Throws MonotoneLikelihoodError when one arm carries no events or the
/// iterate leaves [-20, 20], ConvergenceError after the iteration cap.
CoxFit fit_weighted_cox(const SurvivalSample& sample, const CoxOptions& options = {});

// Cluster sandwich I^-1 (sum_g s_g^2) I^-1 on weighted Lin-Wei score residuals.
double robust_variance(const SurvivalSample& sample, double log_hr);

// Per-row Lin-Wei score residuals (unweighted; multiply by the row weight to
// get the row's contribution to the estimating equation).
std::vector<double> score_residuals(const SurvivalSample& sample, double log_hr);

}  // namespace recurweight
