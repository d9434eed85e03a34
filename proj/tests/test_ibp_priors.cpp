#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "s3r/densities.hpp"
#include "s3r/ibp_priors.hpp"

using namespace s3r;
using doctest::Approx;

namespace {

double harmonic(std::size_t n) {
  double h = 0.0;
  for (std::size_t i = 1; i <= n; ++i) h += 1.0 / static_cast<double>(i);
  return h;
}

}  // namespace

TEST_SUITE("ibp-priors") {

TEST_CASE("single-row IBP is all singletons") {
  Rng rng = make_rng(20);
  for (int i = 0; i < 50; ++i) {
    const auto z = sample_ibp(3.0, 1, rng);
    for (auto m : z.counts) CHECK(m == 1);
    CHECK(z.row_sum(0) == z.k_plus());
  }
}

TEST_CASE("IBP moments") {
  CHECK(ibp_expected_k_plus(2.0, 100) == Approx(2.0 * harmonic(100)).epsilon(1e-14));
  CHECK(ibp_expected_k_plus(2.0, 100) == Approx(10.375).epsilon(1e-4));

  Rng rng = make_rng(21);
  const std::size_t reps = 20000;
  const std::size_t N = 12;
  std::vector<std::vector<double>> row_sums(N);
  std::vector<double> k_plus;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto z = sample_ibp(3.0, N, rng);
    for (std::size_t n = 0; n < N; ++n) row_sums[n].push_back(static_cast<double>(z.row_sum(n)));
    k_plus.push_back(static_cast<double>(z.k_plus()));
    for (std::size_t k = 0; k < z.k_plus(); ++k) {
      std::size_t m = 0;
      for (std::size_t n = 0; n < N; ++n) m += z.z(n, k);
      REQUIRE(m == z.counts[k]);
      REQUIRE(m > 0);
    }
  }
  // Every row is marginally Poisson(alpha).
  for (std::size_t n = 0; n < N; ++n) CHECK(std::abs(oracle::mean(row_sums[n]) - 3.0) < 3 * std::sqrt(3.0 / reps));
  CHECK(std::abs(oracle::mean(k_plus) - 3.0 * harmonic(N)) < 3 * oracle::iid_se(k_plus));
}

TEST_CASE("three-parameter new-dish rate") {
  CHECK(three_param_new_dish_rate(2.0, 1.0, 0.0, 1) == Approx(2.0));
  CHECK(three_param_new_dish_rate(2.0, 1.0, 0.0, 5) == Approx(2.0 / 5.0));
  // Direct gamma-function evaluation at c = 3, sigma = 0.4, n = 7.
  const double ref = 1.5 * std::tgamma(4.0) * std::tgamma(6.0 + 3.4) / (std::tgamma(10.0) * std::tgamma(3.4));
  CHECK(three_param_new_dish_rate(1.5, 3.0, 0.4, 7) == Approx(ref).epsilon(1e-12));
  Rng rng = make_rng(1);
  CHECK_THROWS(sample_3p_ibp(1.0, -0.6, 0.5, 3, rng));
  CHECK_THROWS(sample_3p_ibp(1.0, 1.0, 1.0, 3, rng));
}

TEST_CASE("stable exponent gives heavier column-count tails") {
  Rng rng = make_rng(22);
  const std::size_t reps = 10000;
  const std::size_t N = 30;
  // Per replicate, the number of singleton columns (the power-law signature).
  std::vector<double> with_sigma, without_sigma;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto a = sample_3p_ibp(2.0, 1.0, 0.6, N, rng);
    const auto b = sample_3p_ibp(2.0, 1.0, 0.0, N, rng);
    with_sigma.push_back(static_cast<double>(std::count(a.counts.begin(), a.counts.end(), 1)));
    without_sigma.push_back(static_cast<double>(std::count(b.counts.begin(), b.counts.end(), 1)));
  }
  // One-sided Mann-Whitney via normal approximation with ties.
  std::vector<std::pair<double, int>> pooled;
  for (double v : with_sigma) pooled.emplace_back(v, 0);
  for (double v : without_sigma) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end());
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (pooled[t].second == 0) rank_sum += avg;
    }
    i = j;
  }
  const double n1 = reps, n2 = reps;
  const double u = rank_sum - n1 * (n1 + 1) / 2;
  const double z = (u - n1 * n2 / 2) / std::sqrt(n1 * n2 * (n1 + n2 + 1) / 12);
  CHECK(z > 2.33);
}

TEST_CASE("atom weights lie in [eps, 1) and are sorted") {
  Rng rng = make_rng(23);
  for (double sigma : {0.0, 0.3, 0.999}) {
    for (int rep = 0; rep < 50; ++rep) {
      const auto pi = sample_pi_truncated(2.0, 50.0, sigma, 30, 1e-6, rng);
      REQUIRE(pi.size() == 30);
      CHECK(std::is_sorted(pi.rbegin(), pi.rend()));
      for (double p : pi) {
        CHECK(p >= 1e-6);
        CHECK(p < 1.0);
      }
    }
  }
  CHECK_THROWS(sample_pi_truncated(2.0, 1.0, 0.5, 3, 1.0, rng));
}

TEST_CASE("sigma = 0 atoms are Beta(alpha c / K, c)") {
  Rng rng = make_rng(24);
  const double alpha = 2.0, c = 1.0;
  const int K = 40;
  std::vector<double> draws;
  for (int rep = 0; rep < 2500; ++rep) {
    const auto pi = sample_pi_truncated(alpha, c, 0.0, K, 1e-300, rng);
    draws.insert(draws.end(), pi.begin(), pi.end());
  }
  // Beta(a, 1) has CDF x^a.
  const double a = alpha * c / K;
  const double d = oracle::ks_distance(draws, [&](double x) { return std::pow(x, a); });
  CHECK(d < 0.02);
}

TEST_CASE("Levy atoms match the quadrature CDF") {
  Rng rng = make_rng(25);
  const double c = 1.0, sigma = 0.5, eps = 1e-6;
  std::vector<double> draws(100000);
  for (double& d : draws) d = sample_levy_atom(c, sigma, eps, rng);
  // g(pi) = pi^{-1.5} (1-pi)^{0.5}: integrate in u = log pi for stability.
  auto g_u = [&](double u) {
    const double p = std::exp(u);
    return std::exp(-sigma * u) * std::pow(1.0 - p, c + sigma - 1.0);
  };
  const double lo = std::log(eps);
  const double total = oracle::simpson(g_u, lo, 0.0, 200000);
  CHECK(oracle::ks_distance_log_density(draws, g_u, lo, total) < 0.02);

  // The c + sigma < 1 envelope branch: density pi^{-1.3} (1-pi)^{-0.5}.
  for (double& d : draws) d = sample_levy_atom(0.2, 0.3, 1e-3, rng);
  auto g2 = [&](double u) { return std::exp(-0.3 * u) * std::pow(1.0 - std::exp(u), -0.5); };
  const double lo2 = std::log(1e-3);
  // Normalizer: [eps, 1/2] in log coordinates, then 1 - pi = t^2 on [1/2, 1),
  // where the density becomes 2 (1 - t^2)^{-1.3} dt.
  const double head = oracle::simpson(g2, lo2, std::log(0.5), 20000);
  const double tail = oracle::simpson([](double t) { return 2.0 * std::pow(1.0 - t * t, -1.3); }, 0.0,
                                      std::sqrt(0.5), 20000);
  CHECK(oracle::ks_distance_log_density(draws, g2, lo2, head + tail) < 0.02);
}

TEST_CASE("Levy mass matches direct quadrature") {
  for (auto [c, sigma, eps] : {std::tuple{50.0, 0.999, 1e-6}, std::tuple{1.0, 0.5, 1e-6}, std::tuple{2.0, 0.2, 1e-3}}) {
    const double C = std::exp(std::lgamma(1 + c) - std::lgamma(1 - sigma) - std::lgamma(c + sigma));
    auto integrand = [&](double u) {
      const double p = std::exp(u);
      return std::exp(-sigma * u) * std::pow(1.0 - p, c + sigma - 1.0);
    };
    const double ref = C * oracle::simpson(integrand, std::log(eps), 0.0, 400000);
    CHECK(levy_mass(eps, c, sigma) == Approx(ref).epsilon(1e-6));
  }
  // sigma = 0, c = 1: the mass is log(1/eps).
  CHECK(levy_mass(1e-4, 1.0, 0.0) == Approx(std::log(1e4)).epsilon(1e-8));
}

TEST_CASE("restricted IBP row sums follow f") {
  HyperParams hp;
  hp.k_max = 60;
  hp.nb_r = 1.0;
  hp.nb_p = 0.1;
  hp.c = 50.0;
  hp.sigma = 0.999;
  Rng rng = make_rng(26);
  std::vector<double> sums;
  std::vector<double> hist(61, 0.0);
  for (int rep = 0; rep < 10; ++rep) {
    const auto draw = sample_3r_ibp_full(hp, 1000, rng);
    for (std::size_t n = 0; n < 1000; ++n) {
      std::size_t s = 0;
      for (std::size_t k = 0; k < 60; ++k) s += draw.z(n, k);
      sums.push_back(static_cast<double>(s));
      hist[s] += 1.0;
    }
  }
  CHECK(std::abs(oracle::mean(sums) - 9.0) < 3 * std::sqrt(90.0 / sums.size()));
  const auto f = RowSumPrior::negative_binomial(1.0, 0.1, 60);
  std::vector<double> probs(61);
  for (std::size_t s = 0; s <= 60; ++s) probs[s] = std::exp(f.log_pmf(s));
  CHECK(oracle::chi_square_gof(hist, probs).p_value > 0.01);
}

TEST_CASE("restricted IBP row sums do not depend on the atom draw") {
  HyperParams hp;
  hp.k_max = 20;
  hp.nb_r = 2.0;
  hp.nb_p = 0.4;
  const auto f = RowSumPrior::negative_binomial(2.0, 0.4, 20);
  std::vector<double> probs(21);
  for (std::size_t s = 0; s <= 20; ++s) probs[s] = std::exp(f.log_pmf(s));
  for (std::uint64_t seed : {100u, 200u}) {
    Rng rng = make_rng(seed);
    const auto draw = sample_3r_ibp_full(hp, 10000, rng);
    std::vector<double> hist(21, 0.0);
    for (std::size_t n = 0; n < 10000; ++n) {
      std::size_t s = 0;
      for (std::size_t k = 0; k < 20; ++k) s += draw.z(n, k);
      hist[s] += 1.0;
    }
    CHECK(oracle::chi_square_gof(hist, probs).p_value > 0.01);
  }
}

TEST_CASE("degenerate f at zero gives an empty matrix") {
  HyperParams hp;
  hp.k_max = 10;
  Rng rng = make_rng(27);
  const auto f0 = RowSumPrior::degenerate(0, 10);
  const auto draw = sample_3r_ibp_full(hp, 50, rng, std::nullopt, &f0);
  CHECK(std::all_of(draw.z.data().begin(), draw.z.data().end(), [](auto v) { return v == 0; }));
  CHECK(compact_columns(draw.z).k_plus() == 0);
}

}  // TEST_SUITE
