#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "s3r/random.hpp"

namespace s3r {

/// log e_0 .. log e_K of the elementary symmetric polynomials of an odds
/// vector. Entry 0 is always 0 (e_0 = 1).
struct LogEspTable {
  std::vector<double> log_e;

  std::size_t degree() const { return log_e.size() - 1; }
  double operator[](std::size_t s) const { return log_e[s]; }
};

/// O(K^2) recurrence e_s <- e_s + w_k e_{s-1}, carried out with log-sum-exp.
LogEspTable log_esp(std::span<const double> odds);

/// w_k = pi_k / (1 - pi_k).
std::vector<double> odds_from_weights(std::span<const double> pi);

/// P(z_k = 1 | sum_j z_j = s) for independent z_k ~ Bernoulli(pi_k).
std::vector<double> inclusion_probs(std::span<const double> pi, std::size_t s);

/// Exact draw of a Bernoulli(pi) vector conditioned to sum to s.
std::vector<std::uint8_t> sample_row_given_sum(std::span<const double> pi, std::size_t s,
                                               Rng& rng);

/// Prior f over the number of active features in a row, supported on
/// 0..max_sum(). Stored as a log pmf table.
class RowSumPrior {
 public:
  /// Negative binomial (mean r(1-p)/p) with the mass above k_max folded into
  /// k_max.
  static RowSumPrior negative_binomial(double r, double p, std::size_t k_max);
  static RowSumPrior degenerate(std::size_t s0, std::size_t k_max);
  static RowSumPrior uniform(std::size_t k_max);
  /// Row-sum law of independent Bernoulli(pi) coordinates.
  static RowSumPrior poisson_binomial(std::span<const double> pi);
  /// Takes a log pmf table over 0..K; it is normalized on construction.
  static RowSumPrior from_log_pmf(std::vector<double> log_pmf);

  std::size_t max_sum() const { return log_pmf_.size() - 1; }
  /// -inf outside the support.
  double log_pmf(std::size_t s) const;
  std::span<const double> table() const { return log_pmf_; }

 private:
  explicit RowSumPrior(std::vector<double> log_pmf) : log_pmf_(std::move(log_pmf)) {}
  std::vector<double> log_pmf_;
};

/// log P(z) = log f(|z|) + sum_k log Bernoulli(z_k; pi_k) - log P_PB(|z|; pi).
double restricted_row_log_prior(std::span<const std::uint8_t> z, std::span<const double> pi,
                                const RowSumPrior& f);

/// Log odds of z_k = 1 against z_k = 0 in the full conditional of a
/// restricted row, given the other coordinates. `loglik_ratio` is the
/// caller-supplied data term. May return +/-inf when f or the likelihood
/// rules one value out; throws std::domain_error when neither is possible.
double gibbs_z_entry_logodds(std::span<const std::uint8_t> row, std::size_t k,
                             std::span<const double> pi, const RowSumPrior& f,
                             double loglik_ratio);

/// Same quantity with the ESP table of the full odds vector precomputed;
/// `others_active` is sum_{j != k} z_j.
double gibbs_z_entry_logodds(std::size_t others_active, double log_odds_k,
                             const LogEspTable& esp, const RowSumPrior& f, double loglik_ratio);

}  // namespace s3r
