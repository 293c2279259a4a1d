#include "recurweight/calibrate.hpp"

#include <doctest.h>

#include <cmath>

using namespace recurweight;

namespace {

ScenarioConfig base(Scenario s) {
  ScenarioConfig c;
  c.scenario = s;
  return c;
}

}  // namespace

TEST_CASE("null target short-circuits") {
  const auto e = calibrate_beta_c(0.0, 0.005, base(Scenario::TVCovariates), 100'000);
  CHECK(e.beta_c == 0.0);
  CHECK(e.beta_m1 == 0.0);
  CHECK(e.beta_m2 == 0.0);
  CHECK(std::abs(marginal_hr_oracle(0.0, 1, base(Scenario::TVCovariates), 100'000, 1)) < 0.01);
  CHECK(std::abs(marginal_hr_oracle(0.0, 2, base(Scenario::TVCovariates), 100'000, 1)) < 0.01);
}

TEST_CASE("oracle reproduces the reference marginal effects") {
  const auto b = base(Scenario::TVCovariates);
  CHECK(std::abs(marginal_hr_oracle(0.4599, 1, b, 1'000'000, kDefaultOracleSeed) - 0.4055) < 0.005);
  CHECK(std::abs(marginal_hr_oracle(1.2331, 2, b, 1'000'000, kDefaultOracleSeed) - 0.5616) < 0.01);
}

TEST_CASE("non-collapsibility attenuates and orders the effects") {
  const auto b = base(Scenario::TVCovariates);
  double previous = 0.0;
  for (double bc : {0.3, 0.6, 0.9}) {
    const double m1 = marginal_hr_oracle(bc, 1, b, 200'000, 5);
    const double m2 = marginal_hr_oracle(bc, 2, b, 200'000, 5);
    CHECK(m1 < bc);
    CHECK(m2 < m1);
    CHECK(m1 > previous);
    previous = m1;
  }
  // independent gaps: event 2 sees the same covariate, so the same attenuation
  const auto ind = base(Scenario::IndependentGaps);
  CHECK(std::abs(marginal_hr_oracle(0.7830, 2, ind, 200'000, 5) - marginal_hr_oracle(0.7830, 1, ind, 200'000, 5)) <
        0.02);
}

TEST_CASE("bisection recovers the reference conditional effects") {
  const auto b = base(Scenario::TVCovariates);
  const auto two = calibrate_beta_c(std::log(2.0), 0.005, b);
  CHECK(std::abs(two.beta_c - 0.7830) < 0.01);
  CHECK(std::abs(two.achieved_beta_m1 - std::log(2.0)) <= 0.005);
  CHECK(two.oracle_n == kDefaultOracleN);

  const auto two_half = calibrate_beta_c(0.9163, 0.005, b);
  CHECK(std::abs(two_half.beta_m2 - 0.4686) < 0.01);
  CHECK(std::abs(two_half.beta_c - 1.0313) < 0.01);
}

TEST_CASE("reference table") {
  const auto& t = reference_calibration_table();
  REQUIRE(t.size() == 5);
  for (std::size_t i = 1; i < t.size(); ++i) {
    CHECK(t[i].beta_m1 > t[i - 1].beta_m1);
    CHECK(t[i].beta_c > t[i].beta_m1);
    CHECK(t[i].beta_m2 < t[i].beta_m1);
  }
  REQUIRE(find_reference_entry(1.5) != nullptr);
  CHECK(find_reference_entry(1.5)->beta_c == 0.4599);
  CHECK(find_reference_entry(1.7) == nullptr);

  const auto& e = *find_reference_entry(3.0);
  CHECK(true_log_hr(e, Scenario::IndependentGaps, 2) == e.beta_m1);
  CHECK(true_log_hr(e, Scenario::TVCovariates, 1) == e.beta_m1);
  CHECK(true_log_hr(e, Scenario::TVTreatmentCovariates, 2) == e.beta_m2);
}
