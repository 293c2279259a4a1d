#pragma once

#include "recurweight/simgen.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace recurweight {

struct CalibrationEntry {
  double beta_m1 = 0.0;  // target marginal log HR, first event
  double beta_c = 0.0;   // conditional log HR inducing it
  double beta_m2 = 0.0;  // implied marginal log HR, second event
  std::size_t oracle_n = 0;
  double achieved_beta_m1 = 0.0;
  double tolerance = 0.0;

  bool operator==(const CalibrationEntry&) const = default;
};

inline constexpr std::size_t kDefaultOracleN = 1'000'000;
inline constexpr double kDefaultCalibrationTolerance = 0.005;
inline constexpr std::uint64_t kDefaultOracleSeed = 20200101;

/**
 * True marginal log hazard ratio for one event at a given conditional effect.
 *
 * Generates potential outcomes for `oracle_n` subjects of `base` (its beta_c
 * and tau are overridden), stacks the treated and control gap times of the
 * requested event, and fits an unweighted Cox model on the arm indicator.
 * Which covariate drives event 2 follows the base scenario: x1 for
 * independent gaps, x1 + v otherwise.
 */
double marginal_hr_oracle(double beta_c, int event, const ScenarioConfig& base, std::size_t oracle_n,
                          std::uint64_t seed);

/**
 * Bisection for the conditional log HR whose event-1 marginal log HR equals
 * `target_beta_m1`, over [target, 2 target + 0.5], with a fixed oracle seed.
 *
 * Bisection continues until the bracket is narrower than 1e-4; the achieved
 * marginal effect must then lie within `tolerance` of the target. Target 0
 * short-circuits to an all-zero entry. Throws BracketError if the endpoints
 * do not straddle the target.
 */
CalibrationEntry calibrate_beta_c(double target_beta_m1, double tolerance, const ScenarioConfig& base,
                                  std::size_t oracle_n = kDefaultOracleN, std::uint64_t seed = kDefaultOracleSeed);

// Published calibration for target hazard ratios 1, 1.5, 2, 2.5, 3.
const std::vector<CalibrationEntry>& reference_calibration_table();

// Entry of the reference table matching a marginal HR (within 1e-3), if any.
const CalibrationEntry* find_reference_entry(double target_hr);

// Marginal log HR the analysis of `event` (1 or 2) targets in this scenario.
double true_log_hr(const CalibrationEntry& entry, Scenario scenario, int event);

}  // namespace recurweight
