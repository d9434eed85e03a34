#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "s3r/chain.hpp"
#include "s3r/eval.hpp"

using namespace s3r;
using doctest::Approx;

namespace {

RetainedSample constant_sample(std::size_t N, std::size_t D, double rate) {
  RetainedSample s;
  s.features = {0};
  s.z = DenseMatrix<std::uint8_t>(N, 1, 1);
  s.b = DenseMatrix<double>(1, D, rate);
  return s;
}

PosteriorSummary summary_of(std::size_t N, std::size_t D, std::vector<RetainedSample> samples) {
  PosteriorSummary s;
  s.n_rows = N;
  s.n_cols = D;
  s.k_max = samples.empty() ? 0 : samples.front().z.cols();
  s.samples = std::move(samples);
  return s;
}

// Column-major co-occurrence design: the listed rows are non-zero in col.
CountMatrix occurrences(std::size_t N, const std::vector<std::vector<std::size_t>>& rows_per_col) {
  std::vector<Triplet> t;
  for (std::size_t d = 0; d < rows_per_col.size(); ++d) {
    for (auto n : rows_per_col[d]) t.push_back({n, d, 1});
  }
  return CountMatrix(N, rows_per_col.size(), std::move(t));
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("log perplexity") {
  const CountMatrix zeros(1, 2, {});
  const ObservationMask mask(1, 2, {{0, 0}});
  RetainedSample empty;
  empty.z = DenseMatrix<std::uint8_t>(1, 0);
  empty.b = DenseMatrix<double>(0, 2);
  CHECK(log_perplexity(summary_of(1, 2, {empty}), zeros, mask) == 0.0);
  CHECK(log_perplexity(summary_of(1, 2, {constant_sample(1, 2, 1.0)}), zeros, mask) == Approx(1.0));
  CHECK_THROWS(log_perplexity(summary_of(1, 2, {empty}), zeros, ObservationMask(1, 2)));
}

TEST_CASE("row-mean baseline") {
  const CountMatrix x(1, 3, {{0, 0, 2}, {0, 1, 4}});
  const ObservationMask mask(1, 3, {{0, 2}});
  // Training mean of row 0 is 3; held-out x = 0.
  CHECK(row_mean_baseline_log_perplexity(x, mask) == Approx(3.0));
}

TEST_CASE("umass coherence") {
  DenseMatrix<double> b(1, 2, 0.0);
  b(0, 0) = 0.9;
  b(0, 1) = 0.5;
  // v1 = col 0, v2 = col 1. Always co-occurring, 10 documents each.
  std::vector<std::size_t> ten{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const CountMatrix together = occurrences(20, {ten, ten});
  CHECK(umass_coherence(b, together, 1) == 0.0);
  CHECK(umass_coherence(b, together, 2) == Approx(std::log(11.0 / 10.0)));
  const CountMatrix apart = occurrences(20, {ten, {10, 11, 12, 13, 14, 15, 16, 17, 18, 19}});
  CHECK(umass_coherence(b, apart, 2) == Approx(std::log(1.0 / 10.0)));
  CHECK(std::log(0.1) == Approx(-2.3026).epsilon(1e-4));

  DenseMatrix<double> zero(2, 2, 0.0);
  CHECK_THROWS(umass_coherence(zero, together, 2));
  CHECK_THROWS(umass_coherence(b, together, 0));
}

TEST_CASE("umass coherence is invariant to feature and document order") {
  Rng rng = make_rng(40);
  std::vector<Triplet> t;
  for (std::size_t n = 0; n < 30; ++n) {
    for (std::size_t d = 0; d < 12; ++d) {
      if (bernoulli(0.3, rng)) t.push_back({n, d, 1 + static_cast<std::int64_t>(d % 3)});
    }
  }
  const CountMatrix x(30, 12, t);
  std::vector<Triplet> shuffled_rows;
  for (auto tr : t) shuffled_rows.push_back({29 - tr.row, tr.col, tr.count});
  const CountMatrix xr(30, 12, shuffled_rows);
  DenseMatrix<double> b(4, 12);
  for (double& v : b.data()) v = uniform_open01(rng);
  DenseMatrix<double> b_rev(4, 12);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t d = 0; d < 12; ++d) b_rev(3 - k, d) = b(k, d);
  }
  const double c = umass_coherence(b, x, 5);
  CHECK(umass_coherence(b_rev, x, 5) == Approx(c).epsilon(1e-14));
  CHECK(umass_coherence(b, xr, 5) == Approx(c).epsilon(1e-14));
}

TEST_CASE("qq on toy predictives") {
  Rng rng = make_rng(41);
  // Predictive identical to the data: all-ones rate limit gives all cells.
  const CountMatrix full(3, 4, [] {
    std::vector<Triplet> t;
    for (std::size_t n = 0; n < 3; ++n)
      for (std::size_t d = 0; d < 4; ++d) t.push_back({n, d, 1});
    return t;
  }());
  const auto diag = qq_row_nonzeros(summary_of(3, 4, {constant_sample(3, 4, 1e6)}), full, 5, rng);
  for (auto [e, p] : diag) CHECK(e == p);
  CHECK(qq_mean_abs_gap(diag) == 0.0);

  // Zero rate predicts an empty matrix: horizontal line at 0.
  const auto flat = qq_row_nonzeros(summary_of(3, 4, {constant_sample(3, 4, 0.0)}), full, 5, rng);
  for (auto [e, p] : flat) CHECK(p == 0.0);

  // N = 2 toy with analytic expectations of sorted counts.
  RetainedSample s;
  s.features = {0, 1};
  s.z = DenseMatrix<std::uint8_t>(2, 2, 0);
  s.z(0, 0) = 1;
  s.z(1, 1) = 1;
  s.b = DenseMatrix<double>(2, 1, 0.0);
  s.b(0, 0) = 0.5;
  s.b(1, 0) = 2.0;
  const CountMatrix one_col(2, 1, {{1, 0, 1}});
  const std::size_t draws = 10000;
  const auto pts = qq_row_nonzeros(summary_of(2, 1, {s}), one_col, draws, rng);
  const double p1 = 1 - std::exp(-0.5), p2 = 1 - std::exp(-2.0);
  // min(a, b) = a b and max(a, b) = a + b - a b for indicators.
  const double emin = p1 * p2, emax = p1 + p2 - p1 * p2;
  CHECK(pts[0].first == 0.0);
  CHECK(pts[1].first == 1.0);
  CHECK(std::abs(pts[0].second - emin) < 3 * std::sqrt(emin * (1 - emin) / draws));
  CHECK(std::abs(pts[1].second - emax) < 3 * std::sqrt(emax * (1 - emax) / draws));
  CHECK_THROWS(qq_row_nonzeros(summary_of(2, 1, {s}), one_col, 0, rng));
}

TEST_CASE("binomial baseline qq") {
  Rng rng = make_rng(42);
  const CountMatrix full(2, 3, {{0, 0, 1}, {0, 1, 2}, {0, 2, 1}, {1, 0, 5}, {1, 1, 1}, {1, 2, 1}});
  for (auto [e, p] : binomial_baseline_qq(full, 20, rng)) CHECK(e == p);
  const CountMatrix empty(2, 3, {});
  for (auto [e, p] : binomial_baseline_qq(empty, 20, rng)) CHECK(p == 0.0);

  // 2x2 with 3 non-zeros: k = (2, 1) rows, (2, 1) cols, W = 3.
  // p11 = 4/3 -> 1, p12 = p21 = 2/3, p22 = 1/3.
  const CountMatrix three(2, 2, {{0, 0, 1}, {0, 1, 1}, {1, 0, 1}});
  const std::size_t draws = 20000;
  const auto pts = binomial_baseline_qq(three, draws, rng);
  // Row 0 count = 1 + Bern(2/3); row 1 count = Bern(2/3) + Bern(1/3).
  // Exact distribution of the sorted pair by enumerating the three coins.
  double emin = 0.0, emax = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        const double pr = (a ? 2.0 / 3 : 1.0 / 3) * (b ? 2.0 / 3 : 1.0 / 3) * (c ? 1.0 / 3 : 2.0 / 3);
        const double r0 = 1 + a, r1 = b + c;
        emin += pr * std::min(r0, r1);
        emax += pr * std::max(r0, r1);
      }
  CHECK(std::abs(pts[0].second - emin) < 3 * 1.0 / std::sqrt(draws));
  CHECK(std::abs(pts[1].second - emax) < 3 * 1.0 / std::sqrt(draws));
  for (std::size_t i = 1; i < pts.size(); ++i) {
    CHECK(pts[i].first >= pts[i - 1].first);
    CHECK(pts[i].second >= pts[i - 1].second);
  }
}

TEST_CASE("jaccard matching") {
  CHECK(jaccard_index({0, 1, 2}, {1, 2, 3}) == Approx(0.5));
  const std::vector<std::vector<std::size_t>> a{{0, 1, 2}, {5, 6}, {9}};
  const auto same = jaccard_match(a, a);
  for (const auto& p : same.pairs) {
    CHECK(p.score == 1.0);
    CHECK(p.a == p.b);
  }
  const std::vector<std::vector<std::size_t>> disjoint{{20}, {21}, {22}};
  for (const auto& p : jaccard_match(a, disjoint).pairs) CHECK(p.score == 0.0);

  const std::vector<std::vector<std::size_t>> b{{1, 2, 3}, {9, 10}, {5, 6, 7}, {30}};
  const auto ab = jaccard_match(a, b);
  const auto ba = jaccard_match(b, a);
  REQUIRE(ab.pairs.size() == 3);
  CHECK(ab.unmatched_b == std::vector<std::size_t>{3});
  CHECK(ba.unmatched_a == std::vector<std::size_t>{3});
  CHECK(ab.pairs[0].score == Approx(2.0 / 3.0));
  for (std::size_t i = 0; i < ab.pairs.size(); ++i) {
    CHECK(ab.pairs[i].score == ba.pairs[i].score);
    CHECK(ab.pairs[i].a == ba.pairs[i].b);
  }
}

TEST_CASE("top features") {
  DenseMatrix<double> b(3, 4, 0.0);
  b(0, 2) = 0.78;
  b(1, 0) = 0.5;
  b(1, 3) = 0.5;
  b(2, 0) = 0.68;
  b(2, 1) = 0.78;
  b(2, 3) = 0.72;
  const std::vector<std::string> labels{"live animals", "misc. animal oils", "fish", "wool"};
  const auto all = top_features(b, labels, 1);
  REQUIRE(all.size() == 3);
  CHECK(all[0].top.size() == 1);
  CHECK(all[0].format() == "fish (0.78)");
  // Ties broken by ascending column index.
  CHECK(top_features(b, labels, 2)[1].format() == "live animals (0.50), wool (0.50)");
  CHECK(top_features(b, labels, 3)[2].format() == "misc. animal oils (0.78), wool (0.72), live animals (0.68)");
  const std::vector<std::size_t> only{2};
  CHECK(top_features(b, labels, 2, &only).size() == 1);
  DenseMatrix<double> with_dead(2, 4, 0.0);
  with_dead(1, 1) = 1.0;
  CHECK(top_features(with_dead, labels, 2).size() == 1);
  CHECK_THROWS(top_features(b, labels, 0));
}

TEST_CASE("binarization for the second layer") {
  PosteriorSummary s;
  s.n_rows = 4;
  s.n_cols = 2;
  s.k_max = 3;
  s.z_mean = DenseMatrix<double>(4, 3, 1.0);
  const CountMatrix ones = binarize_posterior_z(s, {"a", "b", "c", "d"});
  CHECK(ones.nonzeros() == 12);
  CHECK(ones.col_labels()[2] == "F2");
  s.z_mean = DenseMatrix<double>(4, 3, 0.0);
  s.z_mean(0, 1) = 0.5;
  s.z_mean(1, 1) = 0.49;
  s.z_mean(2, 1) = 0.3;
  s.z_mean(3, 2) = 0.4;
  // Live means column-mean activity above 1/N: slot 1 (0.3225) but not slot 2 (0.1).
  const CountMatrix edge = binarize_posterior_z(s, {"a", "b", "c", "d"});
  REQUIRE(edge.n_cols() == 1);
  CHECK(edge.col_labels()[0] == "F1");
  CHECK(edge.at(0, 0) == 1);
  CHECK(edge.at(1, 0) == 0);
  s.z_mean(0, 1) = 0.45;
  CHECK_THROWS_AS(binarize_posterior_z(s, {"a", "b", "c", "d"}), std::invalid_argument);
}

TEST_CASE("training cells fit at least as well as held-out cells") {
  Rng rng = make_rng(43);
  std::vector<Triplet> t;
  for (std::size_t n = 0; n < 30; ++n) {
    for (std::size_t d = 0; d < 20; ++d) {
      const double lambda = (n / 10 == d / 7) ? 4.0 : 0.05;
      const auto x = poisson_variate(lambda, rng);
      if (x > 0) t.push_back({n, d, x});
    }
  }
  const CountMatrix x(30, 20, t);
  const ObservationMask held(30, 20, [&] {
    std::vector<std::pair<std::size_t, std::size_t>> c;
    for (std::size_t n = 0; n < 30; ++n) c.emplace_back(n, (n * 7) % 20);
    return c;
  }());
  std::vector<std::pair<std::size_t, std::size_t>> train_cells;
  for (std::size_t n = 0; n < 30; ++n)
    for (std::size_t d = 0; d < 20; ++d)
      if (!held.is_held_out(n, d)) train_cells.emplace_back(n, d);
  const ObservationMask train(30, 20, train_cells);
  ChainConfig cc;
  cc.hp.k_max = 8;
  cc.hp.alpha_B = 1.0;
  cc.hp.c = 1.0;
  cc.hp.sigma = 0.5;
  cc.hp.nb_r = 2.0;
  cc.hp.nb_p = 0.6;
  cc.hp.burn_in = 300;
  cc.hp.n_samples = 100;
  const PosteriorSummary s = run_chain(x, held, cc);
  CHECK(log_perplexity(s, x, train) <= 1.01 * log_perplexity(s, x, held));
}

TEST_CASE("mean and sample standard deviation") {
  const auto [m, sd] = mean_std({1.0, 2.0, 3.0, 4.0});
  CHECK(m == Approx(2.5));
  CHECK(sd == Approx(std::sqrt(5.0 / 3.0)));
}

}  // TEST_SUITE
