#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace s3r {

// All samplers draw from this engine. Distribution objects are constructed
// per call so that the engine state alone determines every future draw,
// which keeps checkpoints exact.
using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

std::string serialize_rng(const Rng& rng);
Rng deserialize_rng(const std::string& text);

/// Uniform on the open interval (0, 1).
double uniform_open01(Rng& rng);
double standard_normal(Rng& rng);
bool bernoulli(double p, Rng& rng);

/// Log of a Gamma(shape, 1) draw. Stable for very small shapes, where the
/// draw itself underflows double precision.
double log_gamma_variate(double shape, Rng& rng);

/// Gamma(shape, rate) draw floored at the smallest normal double so the
/// result is strictly positive.
double gamma_variate(double shape, double rate, Rng& rng);

/// Beta(a, b) draw computed from log-gamma variates.
double beta_variate(double a, double b, Rng& rng);

std::int64_t poisson_variate(double mean, Rng& rng);

/// Negative binomial with mean r (1-p) / p, drawn as a Gamma-Poisson mixture.
std::int64_t negbin_variate(double r, double p, Rng& rng);

/// Multinomial(n, weights / sum(weights)) written into `out`.
void multinomial_variate(std::int64_t n, std::span<const double> weights,
                         std::span<std::int64_t> out, Rng& rng);

}  // namespace s3r
