#include "recurweight/statcore.hpp"

#include "recurweight/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace recurweight {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a;
  std::uint64_t h = splitmix64(s);
  s = h ^ (b * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL);
  return splitmix64(s);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t sm = mix_seed(seed, stream_id);
  for (auto& word : state_) word = splitmix64(sm);
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() {
  // 53 random bits, shifted by half a step so that 0 and 1 are unreachable.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal(double mean, double sd) {
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return mean + sd * radius * std::cos(2.0 * std::numbers::pi * u2);
}

RngStream RngStream::substream(std::uint64_t child_id) const {
  return RngStream(mix_seed(seed_, stream_id_), child_id);
}

double expit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double draw_uniform(RngStream& stream) { return stream.uniform(); }

double draw_normal(RngStream& stream, double mean, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("draw_normal: sd must be positive");
  return stream.normal(mean, sd);
}

double LogisticFit::predict(std::span<const double> row) const {
  if (row.size() != static_cast<std::size_t>(coefficients.size()))
    throw std::invalid_argument("LogisticFit::predict: row length mismatch");
  double eta = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) eta += coefficients[static_cast<Eigen::Index>(j)] * row[j];
  return eta;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& design, std::span<const double> response,
                         std::span<const double> case_weights, const LogisticOptions& options) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (p == 0) throw std::invalid_argument("fit_logistic: empty design");
  if (n < p) throw std::invalid_argument("fit_logistic: fewer rows than coefficients");
  if (response.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("fit_logistic: response length mismatch");
  if (!case_weights.empty() && case_weights.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("fit_logistic: weight length mismatch");

  Eigen::VectorXd y(n), w(n);
  bool seen_zero = false, seen_one = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double yi = response[static_cast<std::size_t>(i)];
    if (yi != 0.0 && yi != 1.0) throw std::invalid_argument("fit_logistic: response must be 0/1");
    const double wi = case_weights.empty() ? 1.0 : case_weights[static_cast<std::size_t>(i)];
    if (!(wi >= 0.0) || !std::isfinite(wi))
      throw std::invalid_argument("fit_logistic: weights must be finite and nonnegative");
    y[i] = yi;
    w[i] = wi;
    if (wi > 0.0) (yi == 1.0 ? seen_one : seen_zero) = true;
  }
  if (!(seen_zero && seen_one))
    throw SeparationError("fit_logistic: response is constant, coefficients diverge");

  LogisticFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd prob(n);
  Eigen::MatrixXd info(p, p);
  Eigen::VectorXd score(p);

  auto evaluate = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = design * b;
    for (Eigen::Index i = 0; i < n; ++i) prob[i] = expit(eta[i]);
    const Eigen::VectorXd var = w.array() * prob.array() * (1.0 - prob.array());
    score = design.transpose() * (w.array() * (y - prob).array()).matrix();
    info = design.transpose() * var.asDiagonal() * design;
  };

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    evaluate(beta);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        (ldlt.vectorD().array() <= 1e-12 * std::max(1.0, info.diagonal().maxCoeff())).any())
      throw SingularMatrixError("fit_logistic: information matrix is singular");
    const Eigen::VectorXd step = ldlt.solve(score);
    beta += step;
    fit.n_iter = iter;
    if (beta.cwiseAbs().maxCoeff() > options.divergence_bound)
      throw SeparationError("fit_logistic: coefficient exceeded divergence bound (separation)");
    if (step.cwiseAbs().maxCoeff() < options.tolerance) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged) {
    // Slow drift towards perfect prediction is separation, not a numerical stall.
    bool perfect = true;
    for (Eigen::Index i = 0; i < n && perfect; ++i)
      perfect = w[i] == 0.0 || std::abs(y[i] - prob[i]) < 1e-6;
    if (perfect) throw SeparationError("fit_logistic: fitted probabilities reach 0/1 (separation)");
  }
  if (!fit.converged)
    throw ConvergenceError("fit_logistic: no convergence after " + std::to_string(options.max_iter) +
                           " iterations");

  evaluate(beta);
  fit.coefficients = beta;
  fit.max_abs_score = score.cwiseAbs().maxCoeff();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  fit.std_errors = ldlt.solve(Eigen::MatrixXd::Identity(p, p)).diagonal().cwiseSqrt();

  constexpr double eps = std::numeric_limits<double>::epsilon();
  fit.fitted_probabilities.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    fit.fitted_probabilities[static_cast<std::size_t>(i)] = std::clamp(prob[i], eps, 1.0 - eps);
  return fit;
}

Eigen::MatrixXd design_with_intercept(std::initializer_list<std::span<const double>> columns) {
  const std::size_t n = columns.size() == 0 ? 0 : columns.begin()->size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size() + 1));
  x.col(0).setOnes();
  Eigen::Index j = 1;
  for (const auto& col : columns) {
    if (col.size() != n) throw std::invalid_argument("design_with_intercept: ragged columns");
    for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), j) = col[i];
    ++j;
  }
  return x;
}

}  // namespace recurweight
