#pragma once

#include "recurweight/simgen.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace recurweight {

// Empirical joint distribution of (Z(1), Z(2)); entries indexed [z1][z2].
struct JointTable {
  std::array<std::array<double, 2>, 2> p{};

  double operator()(int z1, int z2) const { return p[static_cast<std::size_t>(z1)][static_cast<std::size_t>(z2)]; }
  double marginal_first(int z1) const { return (*this)(z1, 0) + (*this)(z1, 1); }
  double total() const { return p[0][0] + p[0][1] + p[1][0] + p[1][1]; }
};

struct TreatmentWeights {
  std::vector<double> sw1;
  std::vector<double> sw2;
  std::vector<double> e1;  // fitted first-event propensity
  std::vector<double> e2;  // fitted second-event propensity (equal to e1 for fixed treatment)
  double p_marginal = 0.0;
  JointTable p_joint;
  bool refit_on_observed = false;  // second-event model fitted on delta1 = 1 only
};

struct CensoringWeights {
  // Zero on rows where the weight is undefined (delta1 = 0, resp. delta2 = 0).
  std::vector<double> sw1_dag;
  std::vector<double> sw2_dag;
  double p_delta1 = 1.0;
  double p_delta2_given_delta1 = 1.0;
};

struct WeightOptions {
  // With censoring, fit the second-event propensity model and p_joint on the
  // subjects whose second gap starts before tau.
  bool refit_on_observed = true;
  // Symmetric percentile truncation (e.g. 0.01 clamps to [1st, 99th]); off by default.
  std::optional<double> truncation;
};

// p1 z1 / e1 + (1 - p1)(1 - z1)/(1 - e1). Rejects e1 or p1 outside (0, 1).
double stabilized_weight_e1(int z1, double e1, double p1);

// p_{z1 z2} over the product of the matching propensity factors.
double stabilized_weight_e2(int z1, int z2, double e1, double e2, const JointTable& p_joint);

TreatmentWeights build_treatment_weights(std::span<const SubjectRecord> subjects,
                                         const ScenarioConfig& config, const WeightOptions& options = {});

// Needs indicators computed at tau. Throws std::invalid_argument when nobody
// reaches the first event (or, given that, the second) before tau.
CensoringWeights build_censoring_weights(std::span<const SubjectRecord> subjects, Scenario scenario,
                                         double tau);

// Clamps weights to the [q, 1 - q] empirical quantiles.
void truncate_weights(std::vector<double>& weights, double q);

}  // namespace recurweight
