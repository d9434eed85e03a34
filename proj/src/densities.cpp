#include "s3r/densities.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace s3r {

double poisson_log_pmf(std::int64_t x, double lambda) {
  if (x < 0) throw std::domain_error("poisson_log_pmf: negative count");
  if (!(lambda >= 0.0)) throw std::domain_error("poisson_log_pmf: negative or NaN rate");
  if (lambda == 0.0) return x == 0 ? 0.0 : kNegInf;
  const double xd = static_cast<double>(x);
  return xd * std::log(lambda) - lambda - std::lgamma(xd + 1.0);
}

double gamma_log_pdf_shape_mean(double b, double shape, double mean) {
  if (!(b > 0.0) || !(shape > 0.0) || !(mean > 0.0)) {
    throw std::domain_error("gamma_log_pdf_shape_mean: arguments must be positive");
  }
  const double rate = shape / mean;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(b) - rate * b;
}

double negbin_log_pmf(std::int64_t s, double r, double p) {
  if (s < 0) throw std::domain_error("negbin_log_pmf: negative count");
  if (!(r > 0.0)) throw std::domain_error("negbin_log_pmf: r must be positive");
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("negbin_log_pmf: p must lie in (0,1)");
  const double sd = static_cast<double>(s);
  return std::lgamma(sd + r) - std::lgamma(r) - std::lgamma(sd + 1.0) + r * std::log(p) +
         sd * std::log1p(-p);
}

double negbin_mean(double r, double p) { return r * (1.0 - p) / p; }

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

}  // namespace s3r
