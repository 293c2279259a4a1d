#include "recurweight/cli.hpp"
#include "recurweight/error.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace recurweight;

namespace {

RunManifest parse(std::vector<std::string> args) { return parse_args(args); }

}  // namespace

TEST_CASE("simulate arguments build the manifest") {
  const auto m = parse({"simulate", "--scenario", "tv-treatment", "--prevalence", "0.5", "--target-hr", "2", "--n",
                        "10000", "--reps", "1000", "--seed", "7"});
  CHECK(m.command == Command::Simulate);
  CHECK(m.config.scenario == Scenario::TVTreatmentCovariates);
  CHECK(m.config.gamma0 == -0.1000);
  CHECK(m.config.alpha0 == -1.1392);
  CHECK(m.config.n_subjects == 10000);
  CHECK(m.n_reps == 1000);
  CHECK(m.master_seed == 7);
  CHECK(m.target_hrs == std::vector<double>{2.0});
  CHECK(m.analysis == CensoredAnalysis::GapScale);
  CHECK(m.estimand == Estimand::Event2);
  CHECK_FALSE(m.config.tau.has_value());

  const auto half = parse({"simulate", "--scenario", "tv-covariates", "--prevalence", "0.5"});
  CHECK(half.config.alpha0 == 0.0);
}

TEST_CASE("calibrate arguments") {
  const auto m = parse({"calibrate", "--targets", "1,1.5,2,2.5,3", "--format", "md"});
  CHECK(m.command == Command::Calibrate);
  CHECK(m.target_hrs == std::vector<double>{1, 1.5, 2, 2.5, 3});
  CHECK(m.format == OutputFormat::Markdown);
  CHECK(m.oracle_n == 1'000'000);
}

TEST_CASE("usage errors") {
  CHECK_THROWS_AS(parse({"simulate", "--tau", "-1"}), UsageError);
  CHECK_THROWS_AS(parse({"simulate", "--scenario", "tv-treatment", "--tau", "-1"}), UsageError);
  CHECK_THROWS_AS(parse({"simulate", "--scenario", "tv-treatment", "--tau", "0"}), UsageError);
  CHECK_THROWS_AS(parse({"simulate"}), UsageError);
  CHECK_THROWS_AS(parse({"simulate", "--scenario", "five"}), UsageError);
  CHECK_THROWS_AS(parse({"simulate", "--scenario", "independent", "--prevalence", "0.3"}), UsageError);
  CHECK_THROWS_AS(parse({"simulate", "--scenario", "independent", "--target-hr", "0.5"}), UsageError);
  CHECK_THROWS_AS(parse({"simulate", "--scenario", "independent", "--target-hr", "2,x"}), UsageError);
  CHECK_THROWS_AS(parse({"simulate", "--scenario", "independent", "--format", "xml"}), UsageError);
  CHECK_THROWS_AS(parse({"simulate", "--scenario", "independent", "--bogus"}), UsageError);
  CHECK_THROWS_AS(parse({"simulate", "--scenario", "tv-covariates", "--estimand", "pooled"}), UsageError);
  CHECK_THROWS_AS(parse({"calibrate", "--scenario", "tv-covariates", "--tau", "1"}), UsageError);
  CHECK_THROWS_AS(parse({"calibrate", "--oracle-n", "1000"}), UsageError);
  CHECK_THROWS_AS(parse({"generate", "--scenario", "independent", "--format", "json"}), UsageError);
  CHECK_THROWS_AS(parse({}), UsageError);
  CHECK_THROWS_AS(parse({"fit"}), UsageError);
}

TEST_CASE("manifest arguments round-trip") {
  const std::vector<std::vector<std::string>> cases{
      {"simulate", "--scenario", "tv-treatment", "--prevalence", "0.5", "--target-hr", "1.5,2", "--tau", "0.25",
       "--truncate", "0.01", "--no-refit", "--analysis", "complete-case", "--out", "x.csv"},
      {"calibrate", "--targets", "2.5", "--recalibrate", "--oracle-n", "200000", "--tolerance", "0.001"},
      {"generate", "--scenario", "independent", "--n", "50", "--seed", "18446744073709551615"},
  };
  for (const auto& args : cases) {
    const auto m = parse(args);
    CHECK(parse_args(manifest_to_args(m)) == m);
  }
}

TEST_CASE("usage text") {
  const auto u = usage();
  CHECK(u.find("calibrate") != std::string::npos);
  CHECK(u.find("--scenario") != std::string::npos);
}

TEST_CASE("generate writes a dataset") {
  auto m = parse({"generate", "--scenario", "tv-treatment", "--n", "20", "--tau", "1", "--target-hr", "2"});
  m.output_path = "test_cli_generate.csv";
  std::ostringstream log;
  REQUIRE(run_command(m, log) == 0);
  std::ifstream in(m.output_path);
  std::string line;
  int comments = 0, rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) ++comments;
    else if (line == "x1,x2,z1,z2,w1,w2,delta1,delta2") header = true;
    else ++rows;
  }
  CHECK(comments > 5);
  CHECK(header);
  CHECK(rows == 20);
}

TEST_CASE("failures give a nonzero exit code") {
  auto m = parse({"simulate", "--scenario", "independent", "--reps", "2", "--n", "50", "--target-hr", "2"});
  m.output_path = "/nonexistent-dir/out.csv";
  std::ostringstream log;
  CHECK(run_command(m, log) != 0);
  CHECK(log.str().find("/nonexistent-dir/out.csv") != std::string::npos);
}
