#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "s3r/conditional_bernoulli.hpp"
#include "s3r/count_matrix.hpp"
#include "s3r/hyper_params.hpp"
#include "s3r/random.hpp"
#include "s3r/state.hpp"

namespace s3r {

/// Multinomial split of x over features with the given rates. Throws
/// std::domain_error when x > 0 and every rate is zero.
std::vector<std::int64_t> sample_aux_counts(std::int64_t x, std::span<const double> rates,
                                            Rng& rng);

/// Redraws x' for the training nonzeros of one row given z and B.
void refresh_row_aux(LatentState& state, const CountMatrix& data, const ObservationMask& mask,
                     std::size_t row, Rng& rng);
void refresh_all_aux(LatentState& state, const CountMatrix& data, const ObservationMask& mask,
                     Rng& rng);

/// Conjugate statistics for B, over training entries only.
struct BStats {
  DenseMatrix<double> aux_sums;       // K x D: sum_n x'_{nd,k}
  DenseMatrix<double> activity_sums;  // K x D: sum_{n : (n,d) observed} z_nk
};

BStats b_sufficient_stats(const LatentState& state, const CountMatrix& data,
                          const ObservationMask& mask);

/// B_kd ~ Gamma(alpha_B + aux_sums, rate alpha_B / mu_B + activity_sums).
DenseMatrix<double> gibbs_update_B(const DenseMatrix<double>& aux_sums,
                                   const DenseMatrix<double>& activity_sums,
                                   const HyperParams& hp, Rng& rng);

/// Row-major Gibbs sweep over z using the marginal Poisson likelihood ratio
/// (x' integrated out), followed by an aux refresh of every row.
void sweep_Z(LatentState& state, const CountMatrix& data, const ObservationMask& mask,
             const RowSumPrior& f, Rng& rng);

/// Log acceptance ratio of a logit-space random-walk move from `current` to
/// `proposed`, including the logit Jacobian.
double mh_logit_log_ratio(double current, double proposed,
                          const std::function<double(double)>& log_target);

/// One logit-space random-walk step on a weight in [eps, 1).
/// Returns the new value; `accepted` reports the outcome.
double mh_logit_step(double current, double step, double eps,
                     const std::function<double(double)>& log_target, Rng& rng, bool& accepted);

/// Log target of atom k as a function of its weight: atom prior plus the
/// pi-dependent part of every restricted row prior.
using AtomLogTarget = std::function<double(std::size_t k, double pi)>;

/// Per-atom MH update of pi, ascending atom index. `override_target`
/// replaces the model target (test injection). Returns acceptance flags.
std::vector<std::uint8_t> mh_update_pi(LatentState& state, const HyperParams& hp, double step,
                                       Rng& rng, const AtomLogTarget* override_target = nullptr);

/// alpha ~ Gamma(shape a + K+, rate 1 / scale + mass).
double sample_alpha(std::size_t k_plus, const HyperParams& hp, double mass, Rng& rng);

struct KernelSettings {
  HyperParams hp;
  RowSumPrior f;
  double levy_mass = 0.0;
  double mh_step = 0.5;

  explicit KernelSettings(const HyperParams& params);
};

struct IterationInfo {
  std::size_t pi_proposals = 0;
  std::size_t pi_accepts = 0;
};

/// One full iteration: Z, pi, B then x', alpha.
IterationInfo mcmc_iteration(LatentState& state, const CountMatrix& data,
                             const ObservationMask& mask, const KernelSettings& settings,
                             Rng& rng);

enum class InitMode { kRandom, kAllActive };

/// z_nk ~ Bernoulli(1/2) (redrawn until every row with positive training
/// data has an active feature), B and pi and alpha from their priors.
LatentState initialize_state(const CountMatrix& data, const ObservationMask& mask,
                             const HyperParams& hp, InitMode mode, Rng& rng);

}  // namespace s3r
