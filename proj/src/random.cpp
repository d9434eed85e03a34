#include "s3r/random.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace s3r {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x53335249u};
  return Rng(seq);
}

std::string serialize_rng(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng deserialize_rng(const std::string& text) {
  std::istringstream is(text);
  Rng rng;
  is >> rng;
  if (is.fail()) throw std::runtime_error("corrupt RNG state");
  return rng;
}

double uniform_open01(Rng& rng) {
  for (;;) {
    const double u = std::generate_canonical<double, 53>(rng);
    if (u > 0.0) return u;
  }
}

double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

bool bernoulli(double p, Rng& rng) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::generate_canonical<double, 53>(rng) < p;
}

double log_gamma_variate(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw std::domain_error("log_gamma_variate: shape must be positive");
  if (shape >= 1.0) {
    const double g = std::gamma_distribution<double>(shape, 1.0)(rng);
    return std::log(g);
  }
  // Gamma(a) = Gamma(a + 1) * U^(1/a), evaluated in log space.
  const double g = std::gamma_distribution<double>(shape + 1.0, 1.0)(rng);
  return std::log(g) + std::log(uniform_open01(rng)) / shape;
}

double gamma_variate(double shape, double rate, Rng& rng) {
  if (!(rate > 0.0)) throw std::domain_error("gamma_variate: rate must be positive");
  const double x = std::exp(log_gamma_variate(shape, rng) - std::log(rate));
  return std::max(x, std::numeric_limits<double>::min());
}

double beta_variate(double a, double b, Rng& rng) {
  const double la = log_gamma_variate(a, rng);
  const double lb = log_gamma_variate(b, rng);
  // a / (a + b) = 1 / (1 + exp(lb - la))
  return 1.0 / (1.0 + std::exp(lb - la));
}

std::int64_t poisson_variate(double mean, Rng& rng) {
  if (!(mean >= 0.0)) throw std::domain_error("poisson_variate: negative mean");
  if (mean == 0.0) return 0;
  return std::poisson_distribution<std::int64_t>(mean)(rng);
}

std::int64_t negbin_variate(double r, double p, Rng& rng) {
  if (!(r > 0.0) || !(p > 0.0 && p < 1.0)) throw std::domain_error("negbin_variate: bad parameters");
  const double lambda = std::exp(log_gamma_variate(r, rng)) * (1.0 - p) / p;
  return poisson_variate(lambda, rng);
}

void multinomial_variate(std::int64_t n, std::span<const double> weights,
                         std::span<std::int64_t> out, Rng& rng) {
  if (out.size() != weights.size()) throw std::invalid_argument("multinomial_variate: size mismatch");
  double remaining_mass = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::int64_t remaining = n;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out[i] = 0;
    if (remaining == 0 || weights[i] <= 0.0) continue;
    if (i + 1 == weights.size() || weights[i] >= remaining_mass) {
      out[i] = remaining;
      remaining = 0;
      continue;
    }
    const double p = std::min(1.0, weights[i] / remaining_mass);
    out[i] = std::binomial_distribution<std::int64_t>(remaining, p)(rng);
    remaining -= out[i];
    remaining_mass -= weights[i];
  }
  if (remaining != 0) {
    // Trailing zero weights: mass belongs to the last positive weight.
    for (std::size_t i = weights.size(); i-- > 0;) {
      if (weights[i] > 0.0) {
        out[i] += remaining;
        return;
      }
    }
    throw std::domain_error("multinomial_variate: positive count with zero total weight");
  }
}

}  // namespace s3r
