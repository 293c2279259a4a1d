#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace recurweight {

/**
 * Deterministic pseudo-random stream.
 *
 * xoshiro256** seeded through SplitMix64 from a mix of (seed, stream_id).
 * Every replicate owns its own stream; distinct stream ids give independent
 * sequences and the same pair always reproduces the same sequence.
 */
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform();

  // Box-Muller, consuming exactly two uniforms per variate.
  double normal(double mean, double sd);

  bool bernoulli(double p) { return uniform() < p; }

  // A child stream keyed on this stream's identity, not its position.
  RngStream substream(std::uint64_t child_id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
};

// Mixes two words into a well-distributed 64-bit value (SplitMix64 finalizer).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

double expit(double x);
double logit(double p);

double draw_uniform(RngStream& stream);
// Throws std::invalid_argument unless sd > 0.
double draw_normal(RngStream& stream, double mean, double sd);

struct LogisticFit {
  Eigen::VectorXd coefficients;  // intercept first
  Eigen::VectorXd std_errors;    // from the inverse weighted information
  bool converged = false;
  int n_iter = 0;
  double max_abs_score = 0.0;
  std::vector<double> fitted_probabilities;

  // Linear predictor for a new covariate row (intercept column included).
  double predict(std::span<const double> row) const;
};

struct LogisticOptions {
  double tolerance = 1e-8;  // max |coefficient change|
  int max_iter = 25;
  double divergence_bound = 30.0;
};

/**
 * Maximum likelihood logistic regression by iteratively reweighted least
 * squares, started at zero.
 *
 * The design must already carry its intercept column. Case weights are
 * optional; an empty span means unit weights. Throws SeparationError when the
 * (positively weighted) response is constant or a coefficient leaves
 * [-30, 30], SingularMatrixError when the information is not positive
 * definite and ConvergenceError after the iteration cap.
 */
LogisticFit fit_logistic(const Eigen::MatrixXd& design, std::span<const double> response,
                         std::span<const double> case_weights = {},
                         const LogisticOptions& options = {});

// Intercept column followed by the given covariate columns.
Eigen::MatrixXd design_with_intercept(std::initializer_list<std::span<const double>> columns);

}  // namespace recurweight
