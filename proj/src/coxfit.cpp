#include "recurweight/coxfit.hpp"

#include "recurweight/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace recurweight {

void SurvivalSample::reserve(std::size_t n) {
  time.reserve(n);
  event.reserve(n);
  treatment.reserve(n);
  weight.reserve(n);
  cluster.reserve(n);
}

void SurvivalSample::add(double t, bool d, bool z, double w, std::int64_t id) {
  time.push_back(t);
  event.push_back(d ? 1 : 0);
  treatment.push_back(z ? 1 : 0);
  weight.push_back(w);
  cluster.push_back(id);
}

void SurvivalSample::validate() const {
  const std::size_t n = time.size();
  if (event.size() != n || treatment.size() != n || weight.size() != n || cluster.size() != n)
    throw std::invalid_argument("SurvivalSample: column lengths differ");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(time[i] > 0.0) || !std::isfinite(time[i]))
      throw std::invalid_argument("SurvivalSample: times must be finite and positive (row " +
                                  std::to_string(i) + ")");
    if (!(weight[i] >= 0.0) || !std::isfinite(weight[i]))
      throw std::invalid_argument("SurvivalSample: weights must be finite and nonnegative (row " +
                                  std::to_string(i) + ")");
    if (event[i] > 1 || treatment[i] > 1)
      throw std::invalid_argument("SurvivalSample: event and treatment must be 0/1");
  }
}

namespace {

// Rows sorted by decreasing time, grouped into blocks of tied times. Ties are
// broken on the remaining columns so the order does not depend on how the
// rows were supplied.
struct RiskOrder {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> group_start;  // size = groups + 1
};

RiskOrder order_rows(const SurvivalSample& s) {
  RiskOrder o;
  o.rows.resize(s.size());
  std::iota(o.rows.begin(), o.rows.end(), std::size_t{0});
  std::sort(o.rows.begin(), o.rows.end(), [&](std::size_t a, std::size_t b) {
    if (s.time[a] != s.time[b]) return s.time[a] > s.time[b];
    if (s.event[a] != s.event[b]) return s.event[a] < s.event[b];
    if (s.treatment[a] != s.treatment[b]) return s.treatment[a] < s.treatment[b];
    if (s.weight[a] != s.weight[b]) return s.weight[a] < s.weight[b];
    return s.cluster[a] < s.cluster[b];
  });
  o.group_start.push_back(0);
  for (std::size_t k = 1; k < o.rows.size(); ++k)
    if (s.time[o.rows[k]] != s.time[o.rows[k - 1]]) o.group_start.push_back(k);
  o.group_start.push_back(o.rows.size());
  return o;
}

PartialLikelihood evaluate(double beta, const SurvivalSample& s, const RiskOrder& o) {
  const double risk_treated = std::exp(beta);
  PartialLikelihood out;
  double s0 = 0.0, s1 = 0.0;
  const std::size_t groups = o.group_start.size() - 1;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t lo = o.group_start[g], hi = o.group_start[g + 1];
    for (std::size_t k = lo; k < hi; ++k) {
      const std::size_t i = o.rows[k];
      if (s.treatment[i]) {
        const double r = s.weight[i] * risk_treated;
        s0 += r;
        s1 += r;
      } else {
        s0 += s.weight[i];
      }
    }
    if (s0 <= 0.0) continue;
    const double zbar = s1 / s0;
    const double log_s0 = std::log(s0);
    for (std::size_t k = lo; k < hi; ++k) {
      const std::size_t i = o.rows[k];
      const double w = s.weight[i];
      if (!s.event[i] || w == 0.0) continue;
      const double z = s.treatment[i];
      out.loglik += w * (beta * z - log_s0);
      out.score += w * (z - zbar);
      out.information += w * zbar * (1.0 - zbar);
    }
  }
  return out;
}

std::vector<double> residuals(const SurvivalSample& s, const RiskOrder& o, double beta) {
  const double risk_treated = std::exp(beta);
  const std::size_t groups = o.group_start.size() - 1;
  std::vector<double> group_s0(groups), group_zbar(groups);
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t k = o.group_start[g]; k < o.group_start[g + 1]; ++k) {
      const std::size_t i = o.rows[k];
      const double r = s.weight[i] * (s.treatment[i] ? risk_treated : 1.0);
      s0 += r;
      if (s.treatment[i]) s1 += r;
    }
    group_s0[g] = s0;
    group_zbar[g] = s0 > 0.0 ? s1 / s0 : 0.0;
  }

  // Ascending time: accumulate the Breslow hazard increments dN/S0 and
  // zbar dN/S0 up to and including each row's own time.
  std::vector<double> out(s.size(), 0.0);
  double cum_hazard = 0.0, cum_zbar_hazard = 0.0;
  for (std::size_t g = groups; g-- > 0;) {
    const std::size_t lo = o.group_start[g], hi = o.group_start[g + 1];
    double weighted_events = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      const std::size_t i = o.rows[k];
      if (s.event[i]) weighted_events += s.weight[i];
    }
    if (weighted_events > 0.0 && group_s0[g] > 0.0) {
      const double dh = weighted_events / group_s0[g];
      cum_hazard += dh;
      cum_zbar_hazard += dh * group_zbar[g];
    }
    for (std::size_t k = lo; k < hi; ++k) {
      const std::size_t i = o.rows[k];
      const double z = s.treatment[i];
      const double risk = s.treatment[i] ? risk_treated : 1.0;
      double r = -risk * (z * cum_hazard - cum_zbar_hazard);
      if (s.event[i]) r += z - group_zbar[g];
      out[i] = r;
    }
  }
  return out;
}

double sandwich(const SurvivalSample& s, const std::vector<double>& resid, double information) {
  if (!(information > 0.0)) throw SingularMatrixError("robust_variance: information is not positive");
  std::vector<std::pair<std::int64_t, double>> contrib(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) contrib[i] = {s.cluster[i], s.weight[i] * resid[i]};
  std::sort(contrib.begin(), contrib.end());
  double meat = 0.0;
  for (std::size_t k = 0; k < contrib.size();) {
    double cluster_sum = 0.0;
    std::size_t j = k;
    for (; j < contrib.size() && contrib[j].first == contrib[k].first; ++j) cluster_sum += contrib[j].second;
    meat += cluster_sum * cluster_sum;
    k = j;
  }
  return meat / (information * information);
}

}  // namespace

double partial_loglik(double beta, const SurvivalSample& sample) {
  return partial_likelihood_derivatives(beta, sample).loglik;
}

PartialLikelihood partial_likelihood_derivatives(double beta, const SurvivalSample& sample) {
  sample.validate();
  return evaluate(beta, sample, order_rows(sample));
}

CoxFit fit_weighted_cox(const SurvivalSample& sample, const CoxOptions& options) {
  sample.validate();
  bool events_treated = false, events_control = false;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!sample.event[i] || sample.weight[i] == 0.0) continue;
    (sample.treatment[i] ? events_treated : events_control) = true;
  }
  if (!events_treated || !events_control)
    throw MonotoneLikelihoodError("fit_weighted_cox: events are needed in both treatment arms");

  const RiskOrder order = order_rows(sample);
  CoxFit fit;
  double beta = 0.0;
  PartialLikelihood cur = evaluate(beta, sample, order);
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    if (std::abs(cur.score) < options.score_tolerance) {
      fit.converged = true;
      break;
    }
    if (!(cur.information > 0.0))
      throw SingularMatrixError("fit_weighted_cox: information is not positive");
    double step = cur.score / cur.information;
    PartialLikelihood next = evaluate(beta + step, sample, order);
    const double slack = 1e-12 * std::max(1.0, std::abs(cur.loglik));
    for (int h = 0; h < options.max_halvings && !(next.loglik >= cur.loglik - slack); ++h) {
      step *= 0.5;
      next = evaluate(beta + step, sample, order);
    }
    beta += step;
    cur = next;
    fit.n_iter = iter;
    if (std::abs(beta) > options.divergence_bound)
      throw MonotoneLikelihoodError("fit_weighted_cox: log hazard ratio diverges");
    if (std::abs(step) < options.step_tolerance) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged)
    throw ConvergenceError("fit_weighted_cox: no convergence after " + std::to_string(options.max_iter) +
                           " iterations");
  if (!(cur.information > 0.0)) throw SingularMatrixError("fit_weighted_cox: information is not positive");

  fit.log_hr = beta;
  fit.score = cur.score;
  fit.information = cur.information;
  fit.naive_se = 1.0 / std::sqrt(cur.information);
  fit.robust_se = options.robust
                      ? std::sqrt(sandwich(sample, residuals(sample, order, beta), cur.information))
                      : std::numeric_limits<double>::quiet_NaN();
  return fit;
}

double robust_variance(const SurvivalSample& sample, double log_hr) {
  sample.validate();
  const RiskOrder order = order_rows(sample);
  const PartialLikelihood at = evaluate(log_hr, sample, order);
  return sandwich(sample, residuals(sample, order, log_hr), at.information);
}

std::vector<double> score_residuals(const SurvivalSample& sample, double log_hr) {
  sample.validate();
  return residuals(sample, order_rows(sample), log_hr);
}

}  // namespace recurweight
