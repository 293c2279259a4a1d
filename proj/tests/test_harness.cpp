#include "recurweight/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>
#include <vector>

using namespace recurweight;

namespace {

ReplicateResult fake(std::size_t index, double beta, double naive = 0.1, double robust = 0.2) {
  ReplicateResult r;
  r.replicate_index = index;
  r.ok = true;
  r.event1 = r.event2 = {beta, naive, robust};
  return r;
}

ScenarioConfig config(Scenario s, std::size_t n, double prevalence = 0.25) {
  auto c = ScenarioConfig::for_prevalence(s, prevalence);
  c.n_subjects = n;
  return c;
}

}  // namespace

TEST_CASE("summary of exact estimates") {
  const std::vector<ReplicateResult> r{fake(0, 0.5), fake(1, 0.5), fake(2, 0.5)};
  const auto row = summarize(r, 0.5, Estimand::Event2, 100);
  CHECK(row.bias_pct == 0.0);
  CHECK(row.ese == 0.0);
  CHECK(row.ase == doctest::Approx(0.1));
  CHECK(row.rse == doctest::Approx(0.2));
  CHECK(row.n_reps == 3);
  CHECK(row.n_subjects == 100);
  CHECK(row.true_hr == doctest::Approx(std::exp(0.5)));
}

TEST_CASE("two-replicate spread") {
  const double d = 0.03;
  const std::vector<ReplicateResult> r{fake(1, 0.7 + d), fake(0, 0.7 - d)};
  const auto row = summarize(r, 0.7, Estimand::Event1);
  CHECK(row.ese == doctest::Approx(d * std::sqrt(2.0)));
  CHECK(row.ese_centered == doctest::Approx(d * std::sqrt(2.0)));
  CHECK(std::abs(row.bias_pct) < 1e-12);

  const std::vector<ReplicateResult> shifted{fake(0, 0.8), fake(1, 0.9)};
  const auto s = summarize(shifted, 0.7, Estimand::Event1);
  CHECK(s.bias_pct == doctest::Approx((0.85 - 0.7) / 0.7 * 100));
  CHECK(s.ese > s.ese_centered);
}

TEST_CASE("null truth, failures and degenerate counts") {
  std::vector<ReplicateResult> r{fake(0, 0.01), fake(1, -0.03)};
  ReplicateResult failed;
  failed.replicate_index = 2;
  failed.failure = "separation";
  r.push_back(failed);
  const auto row = summarize(r, 0.0, Estimand::Event2);
  CHECK(row.bias_is_absolute);
  CHECK(std::isnan(row.bias_pct));
  CHECK(row.abs_bias == doctest::Approx(-0.01));
  CHECK(row.n_failed == 1);
  CHECK(row.n_reps == 3);

  const std::vector<ReplicateResult> one{fake(0, 0.4)};
  const auto single = summarize(one, 0.4, Estimand::Event2);
  CHECK_FALSE(single.ese_defined);
  CHECK(std::isnan(single.ese));

  CHECK_THROWS_AS(summarize(std::vector<ReplicateResult>{}, 0.4, Estimand::Event2), std::invalid_argument);
  CHECK_THROWS_AS(summarize(std::vector<ReplicateResult>{failed}, 0.4, Estimand::Event2), std::invalid_argument);
  // pooled estimates only exist for independent gaps
  CHECK_THROWS_AS(summarize(one, 0.4, Estimand::Pooled), std::invalid_argument);
}

TEST_CASE("replicates are deterministic") {
  const auto c = config(Scenario::TVTreatmentCovariates, 2000);
  auto cc = c;
  cc.beta_c = 0.4599;
  const auto a = run_replicate(cc, 12345);
  const auto b = run_replicate(cc, 12345);
  REQUIRE(a.ok);
  CHECK(a.event2.beta_hat == b.event2.beta_hat);
  CHECK(a.event2.robust_se == b.event2.robust_se);
  CHECK(a.diagnostics == b.diagnostics);
  CHECK(run_replicate(cc, 12346).event2.beta_hat != a.event2.beta_hat);

  std::set<std::uint64_t> seeds;
  for (std::size_t j = 0; j < 1000; ++j) seeds.insert(replicate_seed(20200101, j));
  CHECK(seeds.size() == 1000);
}

TEST_CASE("results do not depend on the worker count") {
  const auto truth = *find_reference_entry(2.0);
  auto c = config(Scenario::TVTreatmentCovariates, 1000);
  c.tau = 1.0;
  const auto one = run_simulation(c, truth, 24, 99, {}, 1);
  const auto three = run_simulation(c, truth, 24, 99, {}, 3);
  REQUIRE(one.rows.size() == three.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) CHECK(one.rows[i] == three.rows[i]);
  for (std::size_t j = 0; j < one.replicates.size(); ++j) {
    CHECK(one.replicates[j].replicate_index == j);
    CHECK(one.replicates[j].event2.beta_hat == three.replicates[j].event2.beta_hat);
  }
}

TEST_CASE("thread count resolution") {
  CHECK(resolve_thread_count(3) == 3);
  setenv("RECURWEIGHT_THREADS", "2", 1);
  CHECK(resolve_thread_count() == 2);
  setenv("RECURWEIGHT_THREADS", "junk", 1);
  CHECK(resolve_thread_count() >= 1);
  unsetenv("RECURWEIGHT_THREADS");
}

TEST_CASE("null effect coverage with independent gaps") {
  const auto truth = *find_reference_entry(1.0);
  const auto sim = run_simulation(config(Scenario::IndependentGaps, 10'000), truth, 100, 3);
  REQUIRE(sim.rows.size() == 3);
  CHECK(sim.row(Estimand::Pooled).estimand == Estimand::Pooled);
  int covered = 0;
  for (const auto& r : sim.replicates) {
    REQUIRE(r.ok);
    REQUIRE(r.pooled.has_value());
    covered += std::abs(r.event2.beta_hat) < 4 * r.event2.robust_se;
  }
  CHECK(covered >= 99);
}

TEST_CASE("time-varying treatment spread") {
  const auto truth = *find_reference_entry(2.0);
  const auto sim = run_simulation(config(Scenario::TVTreatmentCovariates, 10'000, 0.5), truth, 100, 4);
  const auto& row = sim.row(Estimand::Event2);
  CHECK(row.true_beta_m == 0.3551);
  CHECK(std::abs(row.mean_beta_hat - 0.3551) < 0.03);
  CHECK(row.ese > 0.045);
  CHECK(row.ese < 0.085);
  CHECK(row.ase < row.rse);
  CHECK(sim.rows.size() == 2);
  CHECK_THROWS(sim.row(Estimand::Pooled));
}

TEST_CASE("censored event samples") {
  std::vector<SubjectRecord> s(3);
  s[0].w1 = 0.2;  s[0].w2 = 0.3;  s[0].z1 = 1;  s[0].z2 = 0;
  s[1].w1 = 0.5;  s[1].w2 = 0.1;  s[1].z1 = 0;  s[1].z2 = 1;
  s[2].w1 = 0.1;  s[2].w2 = 0.05; s[2].z1 = 1;  s[2].z2 = 1;
  const double tau = 0.25;
  apply_censoring(s, tau);
  TreatmentWeights tw;
  tw.sw1 = {1.0, 2.0, 3.0};
  tw.sw2 = {4.0, 5.0, 6.0};
  CensoringWeights cw;
  cw.sw1_dag = {0.5, 0.0, 0.25};
  cw.sw2_dag = {0.0, 0.0, 0.1};

  const auto e1 = event_sample(1, s, tw, &cw, tau, CensoredAnalysis::GapScale);
  REQUIRE(e1.size() == 3);
  CHECK(e1.time[1] == tau);
  CHECK(e1.event[1] == 0);
  CHECK(e1.weight[1] == 2.0);

  const auto gap = event_sample(2, s, tw, &cw, tau, CensoredAnalysis::GapScale);
  REQUIRE(gap.size() == 2);  // subject 1 never starts gap 2
  CHECK(gap.time[0] == 0.25);
  CHECK(gap.event[0] == 0);
  CHECK(gap.weight[0] == doctest::Approx(2.0));
  CHECK(gap.event[1] == 1);
  CHECK(gap.cluster[1] == 2);

  const auto calendar = event_sample(2, s, tw, &cw, tau, CensoredAnalysis::AtRisk);
  REQUIRE(calendar.size() == 2);
  CHECK(calendar.time[0] == doctest::Approx(0.05));
  CHECK(calendar.event[0] == 0);

  const auto complete = event_sample(2, s, tw, &cw, tau, CensoredAnalysis::CompleteCase);
  REQUIRE(complete.size() == 1);
  CHECK(complete.weight[0] == doctest::Approx(0.6));

  CHECK_THROWS_AS(event_sample(2, s, tw, nullptr, tau, CensoredAnalysis::GapScale), std::invalid_argument);
  CHECK_THROWS_AS(event_sample(3, s, tw, &cw, tau, CensoredAnalysis::GapScale), std::invalid_argument);
}

TEST_CASE("enum names") {
  CHECK(parse_censored_analysis("gap-scale") == CensoredAnalysis::GapScale);
  CHECK(to_string(CensoredAnalysis::CompleteCase) == "complete-case");
  CHECK(parse_estimand("pooled") == Estimand::Pooled);
  CHECK_THROWS_AS(parse_estimand("event3"), std::invalid_argument);
}
