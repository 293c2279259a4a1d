#pragma once

#include "recurweight/statcore.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace recurweight {

enum class Scenario {
  IndependentGaps,        // time-fixed treatment and covariate
  TVCovariates,           // x2 = x1 + v, treatment fixed
  TVTreatmentCovariates,  // x2 = x1 + v, second treatment depends on (x2, z1)
};

std::string_view to_string(Scenario s);
// Accepts the CLI spellings: independent, tv-covariates, tv-treatment.
Scenario parse_scenario(std::string_view name);

inline constexpr double kLog1p5 = 0.40546510810816438;  // ln 1.5

struct ScenarioConfig {
  Scenario scenario = Scenario::IndependentGaps;
  std::size_t n_subjects = 10000;
  double alpha0 = -1.1392;
  double alpha1 = kLog1p5;
  double gamma0 = -1.7233;
  double gamma1 = kLog1p5;
  double gamma2 = kLog1p5;
  double beta1 = kLog1p5;
  double beta_c = 0.0;
  double baseline_rate = 1.0;
  double drift_sd = 4.0;
  std::optional<double> tau;

  // Throws std::invalid_argument on rate <= 0, drift_sd <= 0, n < 2 or tau <= 0.
  void validate() const;

  // Treatment-model intercepts for a target prevalence (0.25 or 0.5). For the
  // first event only alpha0 moves; for time-varying treatment the prevalence
  // refers to the second event and selects gamma0.
  static ScenarioConfig for_prevalence(Scenario scenario, double prevalence);

  bool operator==(const ScenarioConfig&) const = default;
};

struct PotentialGaps {
  double w1_treated = 0.0;
  double w1_control = 0.0;
  double w2_treated = 0.0;
  double w2_control = 0.0;
};

struct SubjectRecord {
  double x1 = 0.0;
  double x2 = 0.0;
  std::uint8_t z1 = 0;
  std::uint8_t z2 = 0;
  double w1 = 0.0;
  double w2 = 0.0;
  std::uint8_t delta1 = 1;
  std::uint8_t delta2 = 1;
  std::optional<PotentialGaps> potential;
};

// -log(u) / (rate * exp(linear_predictor)): exponential-baseline Cox draw.
inline double gen_gap_time(double u, double linear_predictor, double rate) {
  return -std::log(u) / (rate * std::exp(linear_predictor));
}

std::vector<SubjectRecord> gen_dataset(const ScenarioConfig& config, RngStream& stream);

// Same subjects as gen_dataset on an equal stream, with potential gap times
// under z = 1 and z = 0 for both events from common uniforms.
std::vector<SubjectRecord> gen_potential_outcomes(const ScenarioConfig& config, RngStream& stream);

// Administrative censoring indicators at tau (both 1 when tau is unset).
void apply_censoring(std::span<SubjectRecord> subjects, std::optional<double> tau);

// CSV with header x1,x2,z1,z2,w1,w2,delta1,delta2 and round-trip precision.
void write_dataset_csv(std::ostream& out, std::span<const SubjectRecord> subjects);

}  // namespace recurweight
