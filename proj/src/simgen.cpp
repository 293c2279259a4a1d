#include "recurweight/simgen.hpp"

#include <fmt/format.h>

#include <ostream>
#include <stdexcept>
#include <string>

namespace recurweight {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::IndependentGaps: return "independent";
    case Scenario::TVCovariates: return "tv-covariates";
    case Scenario::TVTreatmentCovariates: return "tv-treatment";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "independent") return Scenario::IndependentGaps;
  if (name == "tv-covariates") return Scenario::TVCovariates;
  if (name == "tv-treatment") return Scenario::TVTreatmentCovariates;
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

void ScenarioConfig::validate() const {
  if (!(baseline_rate > 0.0)) throw std::invalid_argument("baseline_rate must be positive");
  if (!(drift_sd > 0.0)) throw std::invalid_argument("drift_sd must be positive");
  if (n_subjects < 2) throw std::invalid_argument("n_subjects must be at least 2");
  if (tau && !(*tau > 0.0 && std::isfinite(*tau))) throw std::invalid_argument("tau must be positive");
}

ScenarioConfig ScenarioConfig::for_prevalence(Scenario scenario, double prevalence) {
  ScenarioConfig c;
  c.scenario = scenario;
  const bool half = prevalence == 0.5;
  if (!half && prevalence != 0.25) throw std::invalid_argument("prevalence must be 0.25 or 0.5");
  if (scenario == Scenario::TVTreatmentCovariates) {
    c.gamma0 = half ? -0.1000 : -1.7233;
  } else {
    c.alpha0 = half ? 0.0 : -1.1392;
  }
  return c;
}

namespace {

// Per subject the draw order is fixed regardless of scenario:
// x1, treatment-1 uniform, u1, v, u2, treatment-2 uniform.
std::vector<SubjectRecord> generate(const ScenarioConfig& config, RngStream& stream, bool potential) {
  config.validate();
  std::vector<SubjectRecord> out(config.n_subjects);
  const double rate = config.baseline_rate;
  for (auto& s : out) {
    s.x1 = stream.normal(0.0, 1.0);
    const double t1 = stream.uniform();
    const double u1 = stream.uniform();
    const double v = stream.normal(0.0, config.drift_sd);
    const double u2 = stream.uniform();
    const double t2 = stream.uniform();

    s.z1 = t1 < expit(config.alpha0 + config.alpha1 * s.x1) ? 1 : 0;
    s.w1 = gen_gap_time(u1, config.beta_c * s.z1 + config.beta1 * s.x1, rate);

    switch (config.scenario) {
      case Scenario::IndependentGaps:
        s.x2 = s.x1;
        s.z2 = s.z1;
        break;
      case Scenario::TVCovariates:
        s.x2 = s.x1 + v;
        s.z2 = s.z1;
        break;
      case Scenario::TVTreatmentCovariates:
        s.x2 = s.x1 + v;
        s.z2 = t2 < expit(config.gamma0 + config.gamma1 * s.x2 + config.gamma2 * s.z1) ? 1 : 0;
        break;
    }
    s.w2 = gen_gap_time(u2, config.beta_c * s.z2 + config.beta1 * s.x2, rate);

    if (potential) {
      PotentialGaps p;
      p.w1_treated = gen_gap_time(u1, config.beta_c + config.beta1 * s.x1, rate);
      p.w1_control = gen_gap_time(u1, config.beta1 * s.x1, rate);
      p.w2_treated = gen_gap_time(u2, config.beta_c + config.beta1 * s.x2, rate);
      p.w2_control = gen_gap_time(u2, config.beta1 * s.x2, rate);
      s.potential = p;
    }
  }
  apply_censoring(out, config.tau);
  return out;
}

}  // namespace

std::vector<SubjectRecord> gen_dataset(const ScenarioConfig& config, RngStream& stream) {
  return generate(config, stream, false);
}

std::vector<SubjectRecord> gen_potential_outcomes(const ScenarioConfig& config, RngStream& stream) {
  return generate(config, stream, true);
}

void apply_censoring(std::span<SubjectRecord> subjects, std::optional<double> tau) {
  for (auto& s : subjects) {
    if (!tau) {
      s.delta1 = 1;
      s.delta2 = 1;
    } else {
      s.delta1 = s.w1 <= *tau ? 1 : 0;
      s.delta2 = s.w1 + s.w2 <= *tau ? 1 : 0;
    }
  }
}

void write_dataset_csv(std::ostream& out, std::span<const SubjectRecord> subjects) {
  out << "x1,x2,z1,z2,w1,w2,delta1,delta2\n";
  for (const auto& s : subjects) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", s.x1, s.x2, int{s.z1}, int{s.z2}, s.w1, s.w2,
                       int{s.delta1}, int{s.delta2});
  }
}

}  // namespace recurweight
