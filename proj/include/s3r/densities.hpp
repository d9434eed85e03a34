#pragma once

#include <cstdint>
#include <limits>

namespace s3r {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log P(x | lambda) for a Poisson variable. lambda == 0 is a point mass at
/// zero: returns 0 for x == 0 and -inf otherwise.
double poisson_log_pmf(std::int64_t x, double lambda);

/// Log density of a Gamma distribution parameterized by shape and mean
/// (rate = shape / mean).
double gamma_log_pdf_shape_mean(double b, double shape, double mean);

/// Negative binomial with P(s) = G(s+r) / (G(r) s!) p^r (1-p)^s.
/// The mean is r (1-p) / p.
double negbin_log_pmf(std::int64_t s, double r, double p);
double negbin_mean(double r, double p);

/// log(exp(a) + exp(b)) that tolerates -inf operands.
double log_add_exp(double a, double b);

}  // namespace s3r
