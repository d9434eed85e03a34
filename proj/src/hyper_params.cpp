#include "s3r/hyper_params.hpp"

#include <spdlog/spdlog.h>

#include <stdexcept>
#include <string>

namespace s3r {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("HyperParams: " + what);
}

}  // namespace

void HyperParams::validate() const {
  require(alpha_prior_shape > 0.0, "alpha_prior_shape must be positive");
  require(alpha_prior_scale > 0.0, "alpha_prior_scale must be positive");
  require(sigma >= 0.0 && sigma < 1.0, "sigma must lie in [0, 1)");
  require(c > -sigma, "c must exceed -sigma");
  require(nb_r > 0.0, "nb_r must be positive");
  require(nb_p > 0.0 && nb_p < 1.0, "nb_p must lie in (0, 1)");
  require(alpha_B > 0.0, "alpha_B must be positive");
  require(mu_B > 0.0, "mu_B must be positive");
  require(k_max >= 1, "k_max must be positive");
  require(eps_trunc > 0.0 && eps_trunc < 1.0, "eps_trunc must lie in (0, 1)");
  require(mh_step > 0.0, "mh_step must be positive");
  require(burn_in >= 0, "burn_in must be non-negative");
  require(n_samples >= 1, "n_samples must be at least 1");
  require(thin >= 1, "thin must be at least 1");
}

double clamp_sigma(double requested) {
  if (requested == 1.0) {
    spdlog::warn("sigma = 1 lies outside [0, 1); using {}", 1.0 - 1e-3);
    return 1.0 - 1e-3;
  }
  return requested;
}

}  // namespace s3r
