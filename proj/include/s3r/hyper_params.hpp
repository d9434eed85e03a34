#pragma once

#include <cstdint>

namespace s3r {

/// Fixed and prior parameters of the model and sampler. Defaults follow the
/// reference experiment setup (c = 50, sigma near 1, NB(1, 0.1) row sums,
/// alpha_B = 0.01, mu_B = 1, 30,000 burn-in and 1,000 retained samples).
struct HyperParams {
  double alpha_prior_shape = 1.0;
  double alpha_prior_scale = 1.0;
  double c = 50.0;
  double sigma = 1.0 - 1e-3;
  double nb_r = 1.0;
  double nb_p = 0.1;
  double alpha_B = 0.01;
  double mu_B = 1.0;
  int k_max = 50;
  double eps_trunc = 1e-6;
  double mh_step = 0.5;
  int burn_in = 30000;
  int n_samples = 1000;
  int thin = 1;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on any violated constraint.
  void validate() const;

  bool operator==(const HyperParams&) const = default;
};

/// Maps a requested sigma of exactly 1 onto 1 - 1e-3 (with a warning);
/// every other value is returned unchanged.
double clamp_sigma(double requested);

}  // namespace s3r
