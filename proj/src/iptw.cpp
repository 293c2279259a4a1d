#include "recurweight/iptw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace recurweight {

namespace {

void require_open_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument(std::string(what) + " must lie strictly in (0, 1)");
}

template <class F>
std::vector<double> column(std::span<const SubjectRecord> subjects, F&& get) {
  std::vector<double> out;
  out.reserve(subjects.size());
  for (const auto& s : subjects) out.push_back(static_cast<double>(get(s)));
  return out;
}

template <class F>
std::vector<double> column_if(std::span<const SubjectRecord> subjects, const std::vector<bool>& keep, F&& get) {
  std::vector<double> out;
  for (std::size_t i = 0; i < subjects.size(); ++i)
    if (keep[i]) out.push_back(static_cast<double>(get(subjects[i])));
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Columns of the second-event censoring model: the observed history, minus
// columns that duplicate another one for the given scenario.
std::vector<double> history_row(const SubjectRecord& s, Scenario scenario) {
  switch (scenario) {
    case Scenario::IndependentGaps: return {1.0, s.x1, double(s.z1)};
    case Scenario::TVCovariates: return {1.0, s.x1, s.x2, double(s.z1)};
    case Scenario::TVTreatmentCovariates: return {1.0, s.x1, s.x2, double(s.z1), double(s.z2)};
  }
  return {};
}

}  // namespace

double stabilized_weight_e1(int z1, double e1, double p1) {
  require_open_unit(e1, "e1");
  require_open_unit(p1, "p1");
  return z1 ? p1 / e1 : (1.0 - p1) / (1.0 - e1);
}

double stabilized_weight_e2(int z1, int z2, double e1, double e2, const JointTable& p_joint) {
  require_open_unit(e1, "e1");
  require_open_unit(e2, "e2");
  const double f1 = z1 ? e1 : 1.0 - e1;
  const double f2 = z2 ? e2 : 1.0 - e2;
  return p_joint(z1, z2) / (f1 * f2);
}

TreatmentWeights build_treatment_weights(std::span<const SubjectRecord> subjects, const ScenarioConfig& config,
                                         const WeightOptions& options) {
  const std::size_t n = subjects.size();
  if (n < 2) throw std::invalid_argument("build_treatment_weights: need at least two subjects");

  TreatmentWeights tw;
  const auto x1 = column(subjects, [](const SubjectRecord& s) { return s.x1; });
  const auto z1 = column(subjects, [](const SubjectRecord& s) { return s.z1; });
  const LogisticFit first = fit_logistic(design_with_intercept({x1}), z1);
  tw.e1 = first.fitted_probabilities;
  tw.p_marginal = mean(z1);

  tw.sw1.resize(n);
  for (std::size_t i = 0; i < n; ++i) tw.sw1[i] = stabilized_weight_e1(subjects[i].z1, tw.e1[i], tw.p_marginal);

  if (config.scenario != Scenario::TVTreatmentCovariates) {
    // Treatment is fixed: Z(2) = Z(1) with certainty, the second factor is 1.
    tw.e2 = tw.e1;
    tw.sw2 = tw.sw1;
    tw.p_joint.p[0][0] = 1.0 - tw.p_marginal;
    tw.p_joint.p[1][1] = tw.p_marginal;
  } else {
    std::vector<bool> observed(n, true);
    if (config.tau && options.refit_on_observed) {
      tw.refit_on_observed = true;
      for (std::size_t i = 0; i < n; ++i) observed[i] = subjects[i].delta1 == 1;
    }
    const auto x2 = column_if(subjects, observed, [](const SubjectRecord& s) { return s.x2; });
    const auto z1o = column_if(subjects, observed, [](const SubjectRecord& s) { return s.z1; });
    const auto z2o = column_if(subjects, observed, [](const SubjectRecord& s) { return s.z2; });
    if (z2o.size() < 3) throw std::invalid_argument("build_treatment_weights: too few subjects reach gap 2");
    const LogisticFit second = fit_logistic(design_with_intercept({x2, z1o}), z2o);

    for (std::size_t i = 0; i < z2o.size(); ++i)
      tw.p_joint.p[static_cast<std::size_t>(z1o[i])][static_cast<std::size_t>(z2o[i])] += 1.0;
    for (auto& row : tw.p_joint.p)
      for (auto& cell : row) cell /= static_cast<double>(z2o.size());

    tw.e2.resize(n);
    tw.sw2.resize(n);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = subjects[i];
      const double row[] = {1.0, s.x2, double(s.z1)};
      tw.e2[i] = std::clamp(expit(second.predict(row)), eps, 1.0 - eps);
      tw.sw2[i] = stabilized_weight_e2(s.z1, s.z2, tw.e1[i], tw.e2[i], tw.p_joint);
    }
  }

  if (options.truncation) {
    truncate_weights(tw.sw1, *options.truncation);
    truncate_weights(tw.sw2, *options.truncation);
  }
  return tw;
}

CensoringWeights build_censoring_weights(std::span<const SubjectRecord> subjects, Scenario scenario, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("build_censoring_weights: tau must be positive");
  const std::size_t n = subjects.size();
  CensoringWeights cw;
  cw.sw1_dag.assign(n, 0.0);
  cw.sw2_dag.assign(n, 0.0);

  std::size_t reached1 = 0;
  for (const auto& s : subjects) {
    if (s.delta1 != (s.w1 <= tau ? 1 : 0))
      throw std::invalid_argument("build_censoring_weights: indicators were not computed at this tau");
    reached1 += s.delta1;
  }
  if (reached1 == 0) throw std::invalid_argument("build_censoring_weights: every subject is censored before event 1");
  cw.p_delta1 = static_cast<double>(reached1) / static_cast<double>(n);

  if (reached1 == n) {
    for (std::size_t i = 0; i < n; ++i) cw.sw1_dag[i] = 1.0;
  } else {
    const auto x1 = column(subjects, [](const SubjectRecord& s) { return s.x1; });
    const auto z1 = column(subjects, [](const SubjectRecord& s) { return s.z1; });
    const auto d1 = column(subjects, [](const SubjectRecord& s) { return s.delta1; });
    const LogisticFit model = fit_logistic(design_with_intercept({x1, z1}), d1);
    for (std::size_t i = 0; i < n; ++i)
      if (subjects[i].delta1) cw.sw1_dag[i] = cw.p_delta1 / model.fitted_probabilities[i];
  }

  std::vector<std::size_t> at_risk;
  std::size_t reached2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!subjects[i].delta1) continue;
    at_risk.push_back(i);
    reached2 += subjects[i].delta2;
  }
  if (reached2 == 0) throw std::invalid_argument("build_censoring_weights: every subject is censored before event 2");
  cw.p_delta2_given_delta1 = static_cast<double>(reached2) / static_cast<double>(at_risk.size());

  if (reached2 == at_risk.size()) {
    for (std::size_t i : at_risk) cw.sw2_dag[i] = cw.sw1_dag[i];
  } else {
    const auto width = static_cast<Eigen::Index>(history_row(subjects[at_risk.front()], scenario).size());
    Eigen::MatrixXd design(static_cast<Eigen::Index>(at_risk.size()), width);
    std::vector<double> d2(at_risk.size());
    for (std::size_t r = 0; r < at_risk.size(); ++r) {
      const auto row = history_row(subjects[at_risk[r]], scenario);
      for (Eigen::Index j = 0; j < width; ++j) design(static_cast<Eigen::Index>(r), j) = row[static_cast<std::size_t>(j)];
      d2[r] = subjects[at_risk[r]].delta2;
    }
    const LogisticFit model = fit_logistic(design, d2);
    for (std::size_t r = 0; r < at_risk.size(); ++r) {
      const std::size_t i = at_risk[r];
      if (subjects[i].delta2)
        cw.sw2_dag[i] = cw.sw1_dag[i] * cw.p_delta2_given_delta1 / model.fitted_probabilities[r];
    }
  }
  return cw;
}

void truncate_weights(std::vector<double>& weights, double q) {
  if (!(q >= 0.0 && q < 0.5)) throw std::invalid_argument("truncate_weights: q must lie in [0, 0.5)");
  if (weights.empty() || q == 0.0) return;
  std::vector<double> sorted = weights;
  std::sort(sorted.begin(), sorted.end());
  const auto last = static_cast<double>(sorted.size() - 1);
  const double lo = sorted[static_cast<std::size_t>(std::floor(q * last))];
  const double hi = sorted[static_cast<std::size_t>(std::ceil((1.0 - q) * last))];
  for (double& w : weights) w = std::clamp(w, lo, hi);
}

}  // namespace recurweight
