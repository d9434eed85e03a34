#include "s3r/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "s3r/densities.hpp"
#include "s3r/ibp_priors.hpp"

namespace s3r {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();
constexpr double kPosInf = std::numeric_limits<double>::infinity();

// Positions (within the row's stored entries) of nonzeros that are not held out.
std::vector<std::size_t> training_positions(const CountMatrix& data, const ObservationMask& mask,
                                            std::size_t row) {
  const auto cols = data.row_cols(row);
  const auto held = mask.held_out_cols(row);
  std::vector<std::size_t> out;
  out.reserve(cols.size());
  std::size_t h = 0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    while (h < held.size() && held[h] < cols[i]) ++h;
    if (h < held.size() && held[h] == cols[i]) continue;
    out.push_back(i);
  }
  return out;
}

double logistic(double log_odds) {
  if (log_odds == kPosInf) return 1.0;
  if (log_odds == kNegInf) return 0.0;
  return log_odds >= 0.0 ? 1.0 / (1.0 + std::exp(-log_odds))
                         : std::exp(log_odds) / (1.0 + std::exp(log_odds));
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace

std::vector<std::int64_t> sample_aux_counts(std::int64_t x, std::span<const double> rates,
                                            Rng& rng) {
  if (x < 0) throw std::domain_error("sample_aux_counts: negative count");
  std::vector<std::int64_t> out(rates.size(), 0);
  if (x == 0) return out;
  multinomial_variate(x, rates, out, rng);
  return out;
}

void refresh_row_aux(LatentState& state, const CountMatrix& data, const ObservationMask& mask,
                     std::size_t row, Rng& rng) {
  const std::size_t K = state.k_max();
  const auto cols = data.row_cols(row);
  const auto vals = data.row_values(row);
  const std::size_t offset = data.row_offset(row);
  std::vector<double> rates(K);
  std::vector<std::int64_t> split(K);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    auto aux = state.aux.row(offset + i);
    std::fill(aux.begin(), aux.end(), 0);
  }
  for (std::size_t i : training_positions(data, mask, row)) {
    for (std::size_t k = 0; k < K; ++k) rates[k] = state.z(row, k) ? state.b(k, cols[i]) : 0.0;
    multinomial_variate(vals[i], rates, split, rng);
    std::copy(split.begin(), split.end(), state.aux.row(offset + i).begin());
  }
}

void refresh_all_aux(LatentState& state, const CountMatrix& data, const ObservationMask& mask,
                     Rng& rng) {
  for (std::size_t n = 0; n < data.n_rows(); ++n) refresh_row_aux(state, data, mask, n, rng);
}

BStats b_sufficient_stats(const LatentState& state, const CountMatrix& data,
                          const ObservationMask& mask) {
  const std::size_t K = state.k_max();
  const std::size_t D = state.n_cols();
  BStats stats{DenseMatrix<double>(K, D, 0.0), DenseMatrix<double>(K, D, 0.0)};
  for (std::size_t n = 0; n < data.n_rows(); ++n) {
    const auto cols = data.row_cols(n);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto aux = state.aux.row(data.row_offset(n) + i);
      for (std::size_t k = 0; k < K; ++k) stats.aux_sums(k, cols[i]) += static_cast<double>(aux[k]);
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (!state.z(n, k)) continue;
      auto act = stats.activity_sums.row(k);
      for (double& a : act) a += 1.0;
      for (auto d : mask.held_out_cols(n)) act[d] -= 1.0;
    }
  }
  return stats;
}

DenseMatrix<double> gibbs_update_B(const DenseMatrix<double>& aux_sums,
                                   const DenseMatrix<double>& activity_sums,
                                   const HyperParams& hp, Rng& rng) {
  if (aux_sums.rows() != activity_sums.rows() || aux_sums.cols() != activity_sums.cols()) {
    throw std::invalid_argument("gibbs_update_B: shape mismatch");
  }
  DenseMatrix<double> b(aux_sums.rows(), aux_sums.cols());
  const double prior_rate = hp.alpha_B / hp.mu_B;
  for (std::size_t k = 0; k < b.rows(); ++k) {
    for (std::size_t d = 0; d < b.cols(); ++d) {
      b(k, d) = gamma_variate(hp.alpha_B + aux_sums(k, d), prior_rate + activity_sums(k, d), rng);
    }
  }
  return b;
}

void sweep_Z(LatentState& state, const CountMatrix& data, const ObservationMask& mask,
             const RowSumPrior& f, Rng& rng) {
  const std::size_t K = state.k_max();
  const std::size_t D = state.n_cols();
  const LogEspTable esp = log_esp(odds_from_weights(state.pi));
  std::vector<double> log_odds(K);
  std::vector<double> b_total(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    log_odds[k] = logit(state.pi[k]);
    for (std::size_t d = 0; d < D; ++d) b_total[k] += state.b(k, d);
  }

  std::vector<double> lambda;
  for (std::size_t n = 0; n < state.n_rows(); ++n) {
    const auto cols = data.row_cols(n);
    const auto vals = data.row_values(n);
    const auto held = mask.held_out_cols(n);
    const std::vector<std::size_t> train = training_positions(data, mask, n);
    auto z = state.z.row(n);

    lambda.assign(train.size(), 0.0);
    std::size_t active = 0;
    for (std::size_t k = 0; k < K; ++k) {
      if (!z[k]) continue;
      ++active;
      for (std::size_t j = 0; j < train.size(); ++j) lambda[j] += state.b(k, cols[train[j]]);
    }

    for (std::size_t k = 0; k < K; ++k) {
      const bool on = z[k] != 0;
      const std::size_t others = active - (on ? 1 : 0);
      double observed_b = b_total[k];
      for (auto d : held) observed_b -= state.b(k, d);
      double llr = -std::max(observed_b, 0.0);
      for (std::size_t j = 0; j < train.size() && llr != kPosInf; ++j) {
        const double bkd = state.b(k, cols[train[j]]);
        const double with_k = on ? lambda[j] : lambda[j] + bkd;
        double without_k = 0.0;
        if (others > 0) without_k = std::max(on ? lambda[j] - bkd : lambda[j], kTiny);
        if (without_k == 0.0) {
          llr = kPosInf;
        } else {
          llr += static_cast<double>(vals[train[j]]) * (std::log(with_k) - std::log(without_k));
        }
      }
      const double lo = gibbs_z_entry_logodds(others, log_odds[k], esp, f, llr);
      const bool next = bernoulli(logistic(lo), rng);
      if (next == on) continue;
      z[k] = next ? 1 : 0;
      active = next ? active + 1 : active - 1;
      for (std::size_t j = 0; j < train.size(); ++j) {
        const double bkd = state.b(k, cols[train[j]]);
        lambda[j] = active == 0 ? 0.0 : (next ? lambda[j] + bkd : lambda[j] - bkd);
      }
    }
    refresh_row_aux(state, data, mask, n, rng);
  }
}

double mh_logit_log_ratio(double current, double proposed,
                          const std::function<double(double)>& log_target) {
  const double jac_new = std::log(proposed) + std::log1p(-proposed);
  const double jac_old = std::log(current) + std::log1p(-current);
  return log_target(proposed) - log_target(current) + jac_new - jac_old;
}

double mh_logit_step(double current, double step, double eps,
                     const std::function<double(double)>& log_target, Rng& rng, bool& accepted) {
  accepted = false;
  const double y = logit(current) + step * standard_normal(rng);
  const double proposed = logistic(y);
  if (!(proposed >= eps && proposed < 1.0)) return current;
  const double log_ratio = mh_logit_log_ratio(current, proposed, log_target);
  if (std::isnan(log_ratio)) throw std::domain_error("mh_logit_step: NaN acceptance ratio");
  if (log_ratio >= 0.0 || std::log(uniform_open01(rng)) < log_ratio) {
    accepted = true;
    return proposed;
  }
  return current;
}

std::vector<std::uint8_t> mh_update_pi(LatentState& state, const HyperParams& hp, double step,
                                       Rng& rng, const AtomLogTarget* override_target) {
  const std::size_t K = state.k_max();
  std::vector<std::uint8_t> accepted(K, 0);

  // Rows enter the target through m_k log w_k - sum_n log e_{s_n}(w).
  std::vector<std::size_t> rows_with_sum(K + 1, 0);
  for (std::size_t n = 0; n < state.n_rows(); ++n) ++rows_with_sum[state.row_sum(n)];
  std::vector<std::size_t> m(K);
  for (std::size_t k = 0; k < K; ++k) m[k] = state.column_count(k);

  std::vector<double> odds = odds_from_weights(state.pi);
  for (std::size_t k = 0; k < K; ++k) {
    std::function<double(double)> target;
    if (override_target != nullptr) {
      target = [&, k](double p) { return (*override_target)(k, p); };
    } else {
      target = [&, k](double p) {
        double lt = atom_log_prior(p, state.alpha, hp.c, hp.sigma, hp.k_max, hp.eps_trunc);
        if (lt == kNegInf) return lt;
        const double saved = odds[k];
        odds[k] = p / (1.0 - p);
        lt += static_cast<double>(m[k]) * std::log(odds[k]);
        if (state.n_rows() > 0) {
          const LogEspTable esp = log_esp(odds);
          for (std::size_t s = 0; s <= K; ++s) {
            if (rows_with_sum[s] > 0) lt -= static_cast<double>(rows_with_sum[s]) * esp[s];
          }
        }
        odds[k] = saved;
        return lt;
      };
    }
    bool ok = false;
    state.pi[k] = mh_logit_step(state.pi[k], step, hp.eps_trunc, target, rng, ok);
    odds[k] = state.pi[k] / (1.0 - state.pi[k]);
    accepted[k] = ok ? 1 : 0;
  }
  return accepted;
}

double sample_alpha(std::size_t k_plus, const HyperParams& hp, double mass, Rng& rng) {
  const double shape = hp.alpha_prior_shape + static_cast<double>(k_plus);
  const double rate = 1.0 / hp.alpha_prior_scale + mass;
  return std::exp(log_gamma_variate(shape, rng) - std::log(rate));
}

KernelSettings::KernelSettings(const HyperParams& params)
    : hp(params),
      f(RowSumPrior::negative_binomial(params.nb_r, params.nb_p,
                                       static_cast<std::size_t>(params.k_max))),
      levy_mass(s3r::levy_mass(params.eps_trunc, params.c, params.sigma)),
      mh_step(params.mh_step) {
  hp.validate();
}

IterationInfo mcmc_iteration(LatentState& state, const CountMatrix& data,
                             const ObservationMask& mask, const KernelSettings& settings,
                             Rng& rng) {
  IterationInfo info;
  sweep_Z(state, data, mask, settings.f, rng);

  const auto accepted = mh_update_pi(state, settings.hp, settings.mh_step, rng);
  info.pi_proposals = accepted.size();
  for (auto a : accepted) info.pi_accepts += a;

  const BStats stats = b_sufficient_stats(state, data, mask);
  state.b = gibbs_update_B(stats.aux_sums, stats.activity_sums, settings.hp, rng);
  refresh_all_aux(state, data, mask, rng);

  state.alpha = sample_alpha(state.k_plus(), settings.hp, settings.levy_mass, rng);
  return info;
}

LatentState initialize_state(const CountMatrix& data, const ObservationMask& mask,
                             const HyperParams& hp, InitMode mode, Rng& rng) {
  hp.validate();
  if (mask.n_rows() != data.n_rows() || mask.n_cols() != data.n_cols()) {
    throw std::invalid_argument("initialize_state: mask shape does not match data");
  }
  const auto K = static_cast<std::size_t>(hp.k_max);
  const std::size_t N = data.n_rows();
  const std::size_t D = data.n_cols();
  LatentState state;
  state.alpha = std::exp(log_gamma_variate(hp.alpha_prior_shape, rng)) * hp.alpha_prior_scale;
  state.pi = sample_pi_truncated(state.alpha, hp.c, hp.sigma, hp.k_max, hp.eps_trunc, rng);
  state.b = DenseMatrix<double>(K, D);
  for (double& v : state.b.data()) v = gamma_variate(hp.alpha_B, hp.alpha_B / hp.mu_B, rng);
  state.z = DenseMatrix<std::uint8_t>(N, K, 0);
  for (std::size_t n = 0; n < N; ++n) {
    auto row = state.z.row(n);
    if (mode == InitMode::kAllActive) {
      std::fill(row.begin(), row.end(), 1);
      continue;
    }
    const bool needs_feature = !training_positions(data, mask, n).empty();
    do {
      for (auto& v : row) v = bernoulli(0.5, rng) ? 1 : 0;
    } while (needs_feature && std::find(row.begin(), row.end(), 1) == row.end());
  }
  state.aux = DenseMatrix<std::int64_t>(data.nonzeros(), K, 0);
  refresh_all_aux(state, data, mask, rng);
  return state;
}

}  // namespace s3r
