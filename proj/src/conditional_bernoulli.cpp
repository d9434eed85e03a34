#include "s3r/conditional_bernoulli.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <stdexcept>

#include "s3r/densities.hpp"

namespace s3r {

namespace {

void check_weights(std::span<const double> pi) {
  for (double p : pi) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("weights must lie in (0, 1)");
  }
}

// Extends an ESP table by one odds value in place.
void push_odds(std::vector<double>& log_e, double log_w) {
  log_e.push_back(kNegInf);
  for (std::size_t s = log_e.size() - 1; s > 0; --s) {
    log_e[s] = log_add_exp(log_e[s], log_w + log_e[s - 1]);
  }
}

// suffix[k] holds the ESP table of odds k..K-1.
std::vector<std::vector<double>> suffix_tables(std::span<const double> log_w) {
  const std::size_t K = log_w.size();
  std::vector<std::vector<double>> suffix(K + 1);
  suffix[K] = {0.0};
  for (std::size_t k = K; k-- > 0;) {
    suffix[k] = suffix[k + 1];
    push_odds(suffix[k], log_w[k]);
  }
  return suffix;
}

std::vector<double> log_odds(std::span<const double> pi) {
  std::vector<double> out(pi.size());
  for (std::size_t k = 0; k < pi.size(); ++k) out[k] = std::log(pi[k]) - std::log1p(-pi[k]);
  return out;
}

}  // namespace

LogEspTable log_esp(std::span<const double> odds) {
  LogEspTable t;
  t.log_e.reserve(odds.size() + 1);
  t.log_e.push_back(0.0);
  for (double w : odds) {
    if (std::isnan(w) || w < 0.0 || !std::isfinite(w)) {
      throw std::domain_error("log_esp: odds must be finite and non-negative");
    }
    push_odds(t.log_e, w > 0.0 ? std::log(w) : kNegInf);
  }
  return t;
}

std::vector<double> odds_from_weights(std::span<const double> pi) {
  std::vector<double> w(pi.size());
  for (std::size_t k = 0; k < pi.size(); ++k) w[k] = pi[k] / (1.0 - pi[k]);
  return w;
}

std::vector<double> inclusion_probs(std::span<const double> pi, std::size_t s) {
  const std::size_t K = pi.size();
  if (s > K) throw std::out_of_range("inclusion_probs: target sum exceeds dimension");
  check_weights(pi);
  std::vector<double> probs(K, 0.0);
  if (s == 0) return probs;

  const std::vector<double> lw = log_odds(pi);
  const auto suffix = suffix_tables(lw);
  const double log_total = suffix[0][s];

  // prefix holds the ESP table of odds 0..k-1 while visiting k.
  std::vector<double> prefix{0.0};
  for (std::size_t k = 0; k < K; ++k) {
    const auto& tail = suffix[k + 1];
    double log_without_k = kNegInf;  // log e_{s-1}(w_{-k})
    for (std::size_t j = 0; j < prefix.size() && j <= s - 1; ++j) {
      const std::size_t rest = s - 1 - j;
      if (rest < tail.size()) log_without_k = log_add_exp(log_without_k, prefix[j] + tail[rest]);
    }
    probs[k] = std::exp(lw[k] + log_without_k - log_total);
    if (std::isnan(probs[k])) throw std::domain_error("inclusion_probs: NaN");
    push_odds(prefix, lw[k]);
  }
  return probs;
}

std::vector<std::uint8_t> sample_row_given_sum(std::span<const double> pi, std::size_t s,
                                               Rng& rng) {
  const std::size_t K = pi.size();
  if (s > K) throw std::out_of_range("sample_row_given_sum: target sum exceeds dimension");
  std::vector<std::uint8_t> z(K, 0);
  if (s == 0) return z;
  check_weights(pi);
  const std::vector<double> lw = log_odds(pi);
  const auto suffix = suffix_tables(lw);
  std::size_t remaining = s;
  for (std::size_t k = 0; k < K && remaining > 0; ++k) {
    const std::size_t left_after = K - k - 1;
    double p = 1.0;
    if (remaining <= left_after) {
      p = std::exp(lw[k] + suffix[k + 1][remaining - 1] - suffix[k][remaining]);
      if (std::isnan(p)) throw std::domain_error("sample_row_given_sum: NaN");
    }
    if (bernoulli(p, rng)) {
      z[k] = 1;
      --remaining;
    }
  }
  return z;
}

RowSumPrior RowSumPrior::negative_binomial(double r, double p, std::size_t k_max) {
  std::vector<double> t(k_max + 1);
  for (std::size_t s = 0; s < k_max; ++s) t[s] = negbin_log_pmf(static_cast<std::int64_t>(s), r, p);
  // P(S >= k_max) = 1 - I_p(r, k_max)
  t[k_max] = k_max == 0 ? 0.0 : std::log(boost::math::ibetac(r, static_cast<double>(k_max), p));
  return RowSumPrior(std::move(t));
}

RowSumPrior RowSumPrior::degenerate(std::size_t s0, std::size_t k_max) {
  if (s0 > k_max) throw std::out_of_range("RowSumPrior::degenerate: s0 exceeds k_max");
  std::vector<double> t(k_max + 1, kNegInf);
  t[s0] = 0.0;
  return RowSumPrior(std::move(t));
}

RowSumPrior RowSumPrior::uniform(std::size_t k_max) {
  return RowSumPrior(std::vector<double>(k_max + 1, -std::log(static_cast<double>(k_max + 1))));
}

RowSumPrior RowSumPrior::poisson_binomial(std::span<const double> pi) {
  check_weights(pi);
  LogEspTable esp = log_esp(odds_from_weights(pi));
  double log_base = 0.0;
  for (double p : pi) log_base += std::log1p(-p);
  for (double& v : esp.log_e) v += log_base;
  return RowSumPrior(std::move(esp.log_e));
}

RowSumPrior RowSumPrior::from_log_pmf(std::vector<double> log_pmf) {
  if (log_pmf.empty()) throw std::invalid_argument("RowSumPrior: empty table");
  double total = kNegInf;
  for (double v : log_pmf) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("RowSumPrior: invalid log pmf entry");
    }
    total = log_add_exp(total, v);
  }
  if (total == kNegInf) throw std::invalid_argument("RowSumPrior: no support");
  for (double& v : log_pmf) v -= total;
  return RowSumPrior(std::move(log_pmf));
}

double RowSumPrior::log_pmf(std::size_t s) const {
  return s < log_pmf_.size() ? log_pmf_[s] : kNegInf;
}

double restricted_row_log_prior(std::span<const std::uint8_t> z, std::span<const double> pi,
                                const RowSumPrior& f) {
  if (z.size() != pi.size()) throw std::invalid_argument("restricted_row_log_prior: size mismatch");
  check_weights(pi);
  std::size_t s = 0;
  double log_bern = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    s += z[k] ? 1 : 0;
    log_bern += z[k] ? std::log(pi[k]) : std::log1p(-pi[k]);
  }
  const double lf = f.log_pmf(s);
  if (lf == kNegInf) return kNegInf;
  const double log_pb = RowSumPrior::poisson_binomial(pi).log_pmf(s);
  return lf + log_bern - log_pb;
}

double gibbs_z_entry_logodds(std::span<const std::uint8_t> row, std::size_t k,
                             std::span<const double> pi, const RowSumPrior& f,
                             double loglik_ratio) {
  if (row.size() != pi.size() || k >= row.size()) {
    throw std::invalid_argument("gibbs_z_entry_logodds: bad dimensions");
  }
  check_weights(pi);
  std::size_t others = 0;
  for (std::size_t j = 0; j < row.size(); ++j) others += (j != k && row[j]) ? 1 : 0;
  const LogEspTable esp = log_esp(odds_from_weights(pi));
  return gibbs_z_entry_logodds(others, std::log(pi[k]) - std::log1p(-pi[k]), esp, f, loglik_ratio);
}

double gibbs_z_entry_logodds(std::size_t others_active, double log_odds_k,
                             const LogEspTable& esp, const RowSumPrior& f, double loglik_ratio) {
  const double lf_on = f.log_pmf(others_active + 1);
  const double lf_off = f.log_pmf(others_active);
  if (lf_on == kNegInf && lf_off == kNegInf) {
    throw std::domain_error("gibbs_z_entry_logodds: row-sum prior has no support here");
  }
  if (std::isnan(loglik_ratio)) throw std::domain_error("gibbs_z_entry_logodds: NaN likelihood ratio");
  if (lf_on == kNegInf) {
    if (loglik_ratio == std::numeric_limits<double>::infinity()) {
      throw std::domain_error("gibbs_z_entry_logodds: prior and likelihood exclude both values");
    }
    return kNegInf;
  }
  if (lf_off == kNegInf) {
    if (loglik_ratio == kNegInf) {
      throw std::domain_error("gibbs_z_entry_logodds: prior and likelihood exclude both values");
    }
    return std::numeric_limits<double>::infinity();
  }
  // P(z) = f(|z|) prod_{j in z} w_j / e_{|z|}(w)
  const double out = lf_on - lf_off + log_odds_k + esp[others_active] - esp[others_active + 1] +
                     loglik_ratio;
  if (std::isnan(out)) throw std::domain_error("gibbs_z_entry_logodds: NaN");
  return out;
}

}  // namespace s3r
