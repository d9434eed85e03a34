#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "s3r/count_matrix.hpp"
#include "s3r/densities.hpp"
#include "s3r/hyper_params.hpp"
#include "s3r/random.hpp"
#include "s3r/rca.hpp"
#include "s3r/state.hpp"

using namespace s3r;
using doctest::Approx;

TEST_SUITE("model-core") {

TEST_CASE("poisson_log_pmf values and conventions") {
  CHECK(poisson_log_pmf(0, 1.0) == Approx(-1.0).epsilon(1e-15));
  CHECK(poisson_log_pmf(0, 0.0) == 0.0);
  CHECK(poisson_log_pmf(3, 0.0) == kNegInf);
  CHECK(poisson_log_pmf(2, 2.0) == Approx(std::log(2.0) - 2.0).epsilon(1e-14));
  CHECK_THROWS_AS(poisson_log_pmf(-1, 1.0), std::domain_error);
  CHECK_THROWS_AS(poisson_log_pmf(1, -0.5), std::domain_error);
}

TEST_CASE("poisson pmf sums to one") {
  for (double lambda : {0.01, 0.5, 1.0, 4.0, 12.5, 20.0}) {
    double total = 0.0;
    for (std::int64_t x = 0; x < 200; ++x) total += std::exp(poisson_log_pmf(x, lambda));
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("gamma density in shape/mean form") {
  CHECK(gamma_log_pdf_shape_mean(1.0, 1.0, 1.0) == Approx(-1.0).epsilon(1e-14));
  CHECK(gamma_log_pdf_shape_mean(1.0, 2.0, 2.0) == Approx(-1.0).epsilon(1e-14));
  CHECK_THROWS_AS(gamma_log_pdf_shape_mean(0.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(gamma_log_pdf_shape_mean(1.0, -1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(gamma_log_pdf_shape_mean(1.0, 1.0, 0.0), std::domain_error);

  // The mean parameter is the distribution mean: integrate b p(b) for shape 2.
  const double m = oracle::simpson([](double b) { return b * std::exp(gamma_log_pdf_shape_mean(b, 2.0, 1.5)); },
                                   1e-12, 60.0, 20000);
  CHECK(m == Approx(1.5).epsilon(1e-8));
}

TEST_CASE("gamma draws match the configured mean") {
  Rng rng = make_rng(11);
  for (auto [shape, mean] : {std::pair{0.01, 1.0}, std::pair{2.0, 3.0}, std::pair{0.5, 0.2}}) {
    std::vector<double> draws(100000);
    for (double& d : draws) d = gamma_variate(shape, shape / mean, rng);
    const double se = mean / std::sqrt(shape) / std::sqrt(static_cast<double>(draws.size()));
    CHECK(std::abs(oracle::mean(draws) - mean) < 3.0 * se);
  }
}

TEST_CASE("negative binomial pmf") {
  CHECK(negbin_log_pmf(0, 1.0, 0.5) == Approx(std::log(0.5)).epsilon(1e-14));
  CHECK(negbin_log_pmf(1, 2.0, 0.5) == Approx(std::log(0.25)).epsilon(1e-14));
  CHECK(negbin_mean(1.0, 0.1) == Approx(9.0).epsilon(1e-14));
  CHECK_THROWS(negbin_log_pmf(1, 0.0, 0.5));
  CHECK_THROWS(negbin_log_pmf(1, 1.0, 1.0));
  for (auto [r, p] : {std::pair{1.0, 0.1}, std::pair{2.5, 0.6}, std::pair{0.3, 0.05}}) {
    double total = 0.0;
    double mean = 0.0;
    for (std::int64_t s = 0; s < 5000; ++s) {
      const double q = std::exp(negbin_log_pmf(s, r, p));
      total += q;
      mean += static_cast<double>(s) * q;
    }
    CHECK(std::abs(total - 1.0) < 1e-10);
    CHECK(mean == Approx(r * (1 - p) / p).epsilon(1e-8));
  }
}

TEST_CASE("row_rate is the dot product of a z row and a B column") {
  LatentState st;
  st.z = DenseMatrix<std::uint8_t>(2, 3, 0);
  st.b = DenseMatrix<double>(3, 1, 0.0);
  st.b(0, 0) = 1.0;
  st.b(1, 0) = 2.0;
  st.b(2, 0) = 9.0;
  CHECK(row_rate(st, 0, 0) == 0.0);
  st.z(0, 0) = 1;
  st.z(0, 1) = 1;
  CHECK(row_rate(st, 0, 0) == Approx(3.0));
  st.z(1, 2) = 1;
  st.b(2, 0) = 3.2;
  CHECK(row_rate(st, 1, 0) == Approx(3.2));
}

TEST_CASE("count matrix construction") {
  const CountMatrix m(2, 2, {{0, 0, 1}, {1, 0, 2}, {1, 1, 3}, {0, 1, 0}});
  CHECK(m.nonzeros() == 3);
  CHECK(m.at(0, 1) == 0);
  CHECK(m.at(1, 1) == 3);
  CHECK(m.row_labels()[1] == "r1");
  CHECK(m.stats().density == Approx(0.75));
  CHECK(m.stats().sparsity == Approx(0.25));
  CHECK_THROWS_AS(CountMatrix(2, 2, {{0, 0, 1}, {0, 0, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(CountMatrix(2, 2, {{0, 0, -1}}), std::invalid_argument);
  CHECK_THROWS_AS(CountMatrix(2, 2, {}, {"a", "a"}), std::invalid_argument);
  CHECK_THROWS_AS(CountMatrix(0, 2, {}), std::invalid_argument);
  CHECK_THROWS(CountMatrix(2, 2, {{2, 0, 1}}));
}

TEST_CASE("observation mask") {
  const ObservationMask m(3, 4, {{0, 3}, {0, 1}, {2, 2}});
  CHECK(m.held_out_count() == 3);
  CHECK(m.is_held_out(0, 1));
  CHECK_FALSE(m.is_held_out(1, 1));
  CHECK(m.held_out_cols(0)[0] == 1);
  CHECK(ObservationMask::hold_out_all(2, 3).held_out_count() == 6);
  CHECK_THROWS(ObservationMask(2, 2, {{2, 0}}));
}

TEST_CASE("hyperparameter validation") {
  HyperParams hp;
  CHECK_NOTHROW(hp.validate());
  CHECK(hp.alpha_B == 0.01);
  CHECK(hp.c == 50.0);
  CHECK(hp.burn_in == 30000);
  CHECK(hp.n_samples == 1000);
  hp.sigma = 1.0;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp.sigma = 0.5;
  hp.c = -0.6;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp.c = -0.4;
  CHECK_NOTHROW(hp.validate());
  CHECK(clamp_sigma(1.0) == Approx(0.999));
  CHECK(clamp_sigma(0.3) == 0.3);
}

TEST_CASE("rca transform") {
  const std::vector<std::string> rows{"A", "B"}, cols{"x", "y"};
  DenseMatrix<double> uniform(2, 2, 5.0);
  const CountMatrix u = rca_transform(uniform, rows, cols);
  CHECK(u.nonzeros() == 4);
  CHECK(u.at(1, 0) == 1);

  DenseMatrix<double> raw(2, 2, 0.0);
  raw(0, 0) = 2.0;
  raw(1, 0) = 1.0;
  raw(1, 1) = 1.0;
  const auto rca = rca_index(raw, rows, cols);
  CHECK(rca(0, 0) == Approx(4.0 / 3.0));
  CHECK(rca_transform(raw, rows, cols).at(0, 0) == 1);
  // B: (1/2) / (1/4) = 2 on y, (1/2)/(3/4) = 2/3 on x.
  CHECK(rca_transform(raw, rows, cols, RcaMode::kBinary).at(1, 0) == 0);
  CHECK(rca_transform(raw, rows, cols, RcaMode::kBinary).at(1, 1) == 1);

  // Binary threshold edge: (99/200) / (200/400) = 0.99 maps to 0.
  DenseMatrix<double> edge(2, 2, 0.0);
  edge(0, 0) = 99.0;
  edge(0, 1) = 101.0;
  edge(1, 0) = 101.0;
  edge(1, 1) = 99.0;
  CHECK(rca_index(edge, rows, cols)(0, 0) == Approx(0.99).epsilon(1e-14));
  CHECK(rca_transform(edge, rows, cols, RcaMode::kBinary).at(0, 0) == 0);
  CHECK(rca_transform(edge, rows, cols, RcaMode::kBinary).at(0, 1) == 1);

  DenseMatrix<double> zero_row(2, 2, 0.0);
  zero_row(0, 0) = 1.0;
  zero_row(0, 1) = 1.0;
  try {
    rca_index(zero_row, rows, cols);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("'B'") != std::string::npos);
  }
}

TEST_CASE("export shares sum to one per row") {
  Rng rng = make_rng(3);
  DenseMatrix<double> raw(5, 7);
  for (double& v : raw.data()) v = gamma_variate(0.7, 0.001, rng);
  std::vector<std::string> rl, cl;
  for (int i = 0; i < 5; ++i) rl.push_back("r" + std::to_string(i));
  for (int i = 0; i < 7; ++i) cl.push_back("c" + std::to_string(i));
  const auto shares = export_shares(raw, rl, cl);
  for (std::size_t n = 0; n < 5; ++n) {
    double s = 0.0;
    for (double v : shares.row(n)) s += v;
    CHECK(std::abs(s - 1.0) < 1e-15);
  }
}

}  // TEST_SUITE
