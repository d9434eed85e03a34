#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "s3r/conditional_bernoulli.hpp"
#include "s3r/hyper_params.hpp"
#include "s3r/matrix.hpp"
#include "s3r/random.hpp"

namespace s3r {

/// Binary N x K+ matrix without all-zero columns, with column counts m_k.
struct BinaryFeatureMatrix {
  DenseMatrix<std::uint8_t> z;
  std::vector<std::size_t> counts;

  std::size_t k_plus() const { return counts.size(); }
  std::size_t row_sum(std::size_t n) const;
};

/// Drops all-zero columns (keeping order) and fills in the column counts.
BinaryFeatureMatrix compact_columns(const DenseMatrix<std::uint8_t>& z);

/// One-parameter IBP via the sequential buffet: customer n (1-based) takes
/// dish k with probability m_k / n and Poisson(alpha / n) new dishes.
BinaryFeatureMatrix sample_ibp(double alpha, std::size_t n_rows, Rng& rng);

/// Rate of new dishes for customer n (1-based) under the three-parameter IBP:
/// alpha G(1+c) G(n-1+c+sigma) / (G(n+c) G(c+sigma)).
double three_param_new_dish_rate(double alpha, double c, double sigma, std::size_t n);

/// Three-parameter IBP: existing dish k taken with probability
/// (m_k - sigma) / (n - 1 + c). Equals sample_ibp at c = 1, sigma = 0.
BinaryFeatureMatrix sample_3p_ibp(double alpha, double c, double sigma, std::size_t n_rows,
                                  Rng& rng);

/// Expected number of non-empty columns of IBP(alpha) over n rows: alpha H_n.
double ibp_expected_k_plus(double alpha, std::size_t n_rows);

/// Unnormalized log density of one atom weight: the restricted Levy density
/// -(1+sigma) log pi + (c+sigma-1) log(1-pi) when sigma > 0, and the finite
/// Beta(alpha c / k_max, c) density when sigma == 0. -inf outside [eps, 1).
double atom_log_prior(double pi, double alpha, double c, double sigma, int k_max, double eps);

/// One draw from the normalized density pi^{-1-sigma} (1-pi)^{c+sigma-1} on
/// [eps, 1), by rejection from a piecewise power-law envelope.
double sample_levy_atom(double c, double sigma, double eps, Rng& rng);

/// k_max atom weights in [eps, 1), sorted descending. Uses the truncated
/// Levy density for sigma > 0 and Beta(alpha c / k_max, c) for sigma == 0.
std::vector<double> sample_pi_truncated(double alpha, double c, double sigma, int k_max,
                                        double eps, Rng& rng);

/// Truncated Levy mass C(c, sigma) * int_eps^1 pi^{-1-sigma}(1-pi)^{c+sigma-1} dpi
/// with C = G(1+c) / (G(1-sigma) G(c+sigma)); relative tolerance 1e-8.
/// Throws std::runtime_error if the quadrature does not converge.
double levy_mass(double eps, double c, double sigma);

/// Full joint draw from the combined prior, keeping all k_max slots.
struct RestrictedIbpDraw {
  double alpha = 0.0;
  std::vector<double> pi;
  DenseMatrix<std::uint8_t> z;  // n_rows x k_max
};

/// Draws alpha from its prior unless given, pi via sample_pi_truncated, each
/// row sum from f (negative binomial clamped to k_max when f is absent), and
/// then the row by conditional-Bernoulli sampling.
RestrictedIbpDraw sample_3r_ibp_full(const HyperParams& hp, std::size_t n_rows, Rng& rng,
                                     std::optional<double> alpha = std::nullopt,
                                     const RowSumPrior* f = nullptr);

BinaryFeatureMatrix sample_3r_ibp(const HyperParams& hp, std::size_t n_rows, Rng& rng);

}  // namespace s3r
