#include "s3r/ibp_priors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "s3r/densities.hpp"

namespace s3r {

namespace {

// Sequential buffet shared by the one- and three-parameter samplers.
// take_prob(m_k, n) and new_rate(n) use the 1-based customer index n.
BinaryFeatureMatrix buffet(std::size_t n_rows, Rng& rng,
                           const std::function<double(std::size_t, std::size_t)>& take_prob,
                           const std::function<double(std::size_t)>& new_rate) {
  std::vector<std::size_t> counts;
  std::vector<std::vector<std::size_t>> dishes(n_rows);
  for (std::size_t n = 1; n <= n_rows; ++n) {
    auto& row = dishes[n - 1];
    const std::size_t existing = counts.size();
    for (std::size_t k = 0; k < existing; ++k) {
      if (bernoulli(take_prob(counts[k], n), rng)) row.push_back(k);
    }
    const std::int64_t fresh = poisson_variate(new_rate(n), rng);
    for (std::int64_t j = 0; j < fresh; ++j) {
      row.push_back(counts.size());
      counts.push_back(0);
    }
    for (std::size_t k : row) ++counts[k];
  }
  BinaryFeatureMatrix out;
  out.z = DenseMatrix<std::uint8_t>(n_rows, counts.size(), 0);
  for (std::size_t n = 0; n < n_rows; ++n) {
    for (std::size_t k : dishes[n]) out.z(n, k) = 1;
  }
  out.counts = std::move(counts);
  return out;
}

double log_levy_kernel(double pi, double c, double sigma) {
  return -(1.0 + sigma) * std::log(pi) + (c + sigma - 1.0) * std::log1p(-pi);
}

// int_a^b pi^{-1-sigma} dpi
double power_mass(double a, double b, double sigma) {
  if (sigma == 0.0) return std::log(b / a);
  return (std::pow(a, -sigma) - std::pow(b, -sigma)) / sigma;
}

// Inverse CDF of pi^{-1-sigma} restricted to [a, b).
double power_draw(double a, double b, double sigma, double u) {
  if (sigma == 0.0) return a * std::pow(b / a, u);
  const double lo = std::pow(a, -sigma);
  const double hi = std::pow(b, -sigma);
  return std::pow(lo - u * (lo - hi), -1.0 / sigma);
}

std::size_t draw_from_table(const RowSumPrior& f, Rng& rng) {
  double u = uniform_open01(rng);
  const auto t = f.table();
  for (std::size_t s = 0; s < t.size(); ++s) {
    u -= std::exp(t[s]);
    if (u <= 0.0) return s;
  }
  return f.max_sum();
}

}  // namespace

std::size_t BinaryFeatureMatrix::row_sum(std::size_t n) const {
  std::size_t s = 0;
  for (auto v : z.row(n)) s += v;
  return s;
}

BinaryFeatureMatrix compact_columns(const DenseMatrix<std::uint8_t>& z) {
  std::vector<std::size_t> keep;
  std::vector<std::size_t> counts;
  for (std::size_t k = 0; k < z.cols(); ++k) {
    std::size_t m = 0;
    for (std::size_t n = 0; n < z.rows(); ++n) m += z(n, k);
    if (m > 0) {
      keep.push_back(k);
      counts.push_back(m);
    }
  }
  BinaryFeatureMatrix out;
  out.z = DenseMatrix<std::uint8_t>(z.rows(), keep.size(), 0);
  for (std::size_t n = 0; n < z.rows(); ++n) {
    for (std::size_t j = 0; j < keep.size(); ++j) out.z(n, j) = z(n, keep[j]);
  }
  out.counts = std::move(counts);
  return out;
}

BinaryFeatureMatrix sample_ibp(double alpha, std::size_t n_rows, Rng& rng) {
  if (!(alpha > 0.0)) throw std::invalid_argument("sample_ibp: alpha must be positive");
  return buffet(
      n_rows, rng,
      [](std::size_t m, std::size_t n) { return static_cast<double>(m) / static_cast<double>(n); },
      [alpha](std::size_t n) { return alpha / static_cast<double>(n); });
}

double three_param_new_dish_rate(double alpha, double c, double sigma, std::size_t n) {
  const double nd = static_cast<double>(n);
  return alpha * std::exp(std::lgamma(1.0 + c) + std::lgamma(nd - 1.0 + c + sigma) -
                          std::lgamma(nd + c) - std::lgamma(c + sigma));
}

BinaryFeatureMatrix sample_3p_ibp(double alpha, double c, double sigma, std::size_t n_rows,
                                  Rng& rng) {
  if (!(alpha > 0.0)) throw std::invalid_argument("sample_3p_ibp: alpha must be positive");
  if (!(sigma >= 0.0 && sigma < 1.0)) throw std::invalid_argument("sample_3p_ibp: sigma must lie in [0, 1)");
  if (!(c > -sigma)) throw std::invalid_argument("sample_3p_ibp: c must exceed -sigma");
  return buffet(
      n_rows, rng,
      [c, sigma](std::size_t m, std::size_t n) {
        return (static_cast<double>(m) - sigma) / (static_cast<double>(n) - 1.0 + c);
      },
      [alpha, c, sigma](std::size_t n) { return three_param_new_dish_rate(alpha, c, sigma, n); });
}

double ibp_expected_k_plus(double alpha, std::size_t n_rows) {
  double h = 0.0;
  for (std::size_t i = 1; i <= n_rows; ++i) h += 1.0 / static_cast<double>(i);
  return alpha * h;
}

double atom_log_prior(double pi, double alpha, double c, double sigma, int k_max, double eps) {
  if (!(pi >= eps && pi < 1.0)) return kNegInf;
  if (sigma > 0.0) return log_levy_kernel(pi, c, sigma);
  const double a = alpha * c / static_cast<double>(k_max);
  return (a - 1.0) * std::log(pi) + (c - 1.0) * std::log1p(-pi);
}

double sample_levy_atom(double c, double sigma, double eps, Rng& rng) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("sample_levy_atom: eps must lie in (0, 1)");
  const double beta = c + sigma;
  if (beta >= 1.0) {
    // Envelope pi^{-1-sigma} on [eps, 1); accept with (1-pi)^{beta-1}.
    for (;;) {
      const double pi = power_draw(eps, 1.0, sigma, uniform_open01(rng));
      if (pi >= 1.0) continue;
      if (std::log(uniform_open01(rng)) <= (beta - 1.0) * std::log1p(-pi)) return pi;
    }
  }
  // beta < 1: split at m = max(eps, 1/2). Left piece uses pi^{-1-sigma}
  // bounded by (1-m)^{beta-1}; right piece uses (1-pi)^{beta-1} bounded by
  // m^{-1-sigma}.
  const double m = std::max(eps, 0.5);
  const double left_mass = eps < m ? std::pow(1.0 - m, beta - 1.0) * power_mass(eps, m, sigma) : 0.0;
  const double right_mass = std::pow(m, -1.0 - sigma) * std::pow(1.0 - m, beta) / beta;
  const double p_left = left_mass / (left_mass + right_mass);
  for (;;) {
    if (uniform_open01(rng) < p_left) {
      const double pi = power_draw(eps, m, sigma, uniform_open01(rng));
      const double log_accept = (beta - 1.0) * (std::log1p(-pi) - std::log1p(-m));
      if (std::log(uniform_open01(rng)) <= log_accept) return pi;
    } else {
      const double t = (1.0 - m) * std::pow(uniform_open01(rng), 1.0 / beta);
      const double pi = 1.0 - t;
      if (pi >= 1.0 || pi < eps) continue;
      const double log_accept = -(1.0 + sigma) * (std::log(pi) - std::log(m));
      if (std::log(uniform_open01(rng)) <= log_accept) return pi;
    }
  }
}

std::vector<double> sample_pi_truncated(double alpha, double c, double sigma, int k_max,
                                        double eps, Rng& rng) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("sample_pi_truncated: eps_trunc must lie in (0, 1)");
  if (k_max < 1) throw std::invalid_argument("sample_pi_truncated: k_max must be positive");
  if (!(sigma >= 0.0 && sigma < 1.0) || !(c > -sigma)) {
    throw std::invalid_argument("sample_pi_truncated: invalid (c, sigma)");
  }
  const double top = std::nextafter(1.0, 0.0);
  std::vector<double> pi(static_cast<std::size_t>(k_max));
  for (double& p : pi) {
    if (sigma > 0.0) {
      p = sample_levy_atom(c, sigma, eps, rng);
    } else {
      p = std::clamp(beta_variate(alpha * c / k_max, c, rng), eps, top);
    }
  }
  std::sort(pi.begin(), pi.end(), std::greater<>());
  return pi;
}

double levy_mass(double eps, double c, double sigma) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("levy_mass: eps must lie in (0, 1)");
  const double beta = c + sigma;
  // Substitute u = log(pi): integrand exp(-sigma u) (1 - e^u)^{beta-1}.
  auto integrand = [sigma, beta](double u) {
    const double one_minus = -std::expm1(u);
    if (one_minus <= 0.0) return 0.0;
    return std::exp(-sigma * u + (beta - 1.0) * std::log(one_minus));
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(integrand, std::log(eps), 0.0, 1e-10, &error, &l1);
  if (!std::isfinite(value) || error > 1e-8 * std::abs(value)) {
    throw std::runtime_error("levy_mass: quadrature did not converge");
  }
  const double log_norm = std::lgamma(1.0 + c) - std::lgamma(1.0 - sigma) - std::lgamma(c + sigma);
  return std::exp(log_norm) * value;
}

RestrictedIbpDraw sample_3r_ibp_full(const HyperParams& hp, std::size_t n_rows, Rng& rng,
                                     std::optional<double> alpha, const RowSumPrior* f) {
  hp.validate();
  RestrictedIbpDraw out;
  out.alpha = alpha ? *alpha : std::exp(log_gamma_variate(hp.alpha_prior_shape, rng)) * hp.alpha_prior_scale;
  out.pi = sample_pi_truncated(out.alpha, hp.c, hp.sigma, hp.k_max, hp.eps_trunc, rng);
  const auto k_max = static_cast<std::size_t>(hp.k_max);
  out.z = DenseMatrix<std::uint8_t>(n_rows, k_max, 0);
  std::size_t clamped = 0;
  for (std::size_t n = 0; n < n_rows; ++n) {
    std::size_t s = 0;
    if (f != nullptr) {
      s = std::min(draw_from_table(*f, rng), k_max);
    } else {
      const auto raw = static_cast<std::size_t>(negbin_variate(hp.nb_r, hp.nb_p, rng));
      if (raw > k_max) ++clamped;
      s = std::min(raw, k_max);
    }
    const auto row = sample_row_given_sum(out.pi, s, rng);
    std::copy(row.begin(), row.end(), out.z.row(n).begin());
  }
  if (clamped > 0) {
    spdlog::warn("{} of {} row sums exceeded k_max = {} and were clamped", clamped, n_rows, k_max);
  }
  return out;
}

BinaryFeatureMatrix sample_3r_ibp(const HyperParams& hp, std::size_t n_rows, Rng& rng) {
  return compact_columns(sample_3r_ibp_full(hp, n_rows, rng).z);
}

}  // namespace s3r
