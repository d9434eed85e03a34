#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "s3r/chain.hpp"
#include "s3r/count_matrix.hpp"
#include "s3r/matrix.hpp"
#include "s3r/random.hpp"
#include "s3r/state.hpp"

namespace s3r {

/// -(1/|H|) sum over held-out cells of predictive_log_lik. Lower is better.
double log_perplexity(const PosteriorSummary& summary, const CountMatrix& data,
                      const ObservationMask& mask);

/// Same metric for the rate-only baseline lambda_nd = mean of row n over
/// its training cells.
double row_mean_baseline_log_perplexity(const CountMatrix& data, const ObservationMask& mask);

/// Top `top_m` columns of one B row by weight, ties broken by ascending
/// column index.
std::vector<std::size_t> top_columns(std::span<const double> weights, std::size_t top_m);

/// UMass coherence averaged over features (rows of b_mean, or the listed
/// slots). Rows with all-zero weights are skipped; throws if none remain.
/// Pairs whose conditioning column never occurs are skipped.
double umass_coherence(const DenseMatrix<double>& b_mean, const CountMatrix& data,
                       std::size_t top_m,
                       const std::vector<std::size_t>* features = nullptr);

using QqPoints = std::vector<std::pair<double, double>>;

/// Sorted per-row nonzero counts of `data` paired with the mean sorted
/// counts of replicate matrices X ~ Poisson(Z^s B^s), s drawn uniformly
/// from the retained samples.
QqPoints qq_row_nonzeros(const PosteriorSummary& summary, const CountMatrix& data,
                         std::size_t n_draws, Rng& rng);

/// Baseline replicates with independent cells, P(x_nd > 0) =
/// min(1, k_n k_d / W) for row/column nonzero counts k and total W.
QqPoints binomial_baseline_qq(const CountMatrix& data, std::size_t n_draws, Rng& rng);

/// Mean absolute gap between the two coordinates.
double qq_mean_abs_gap(const QqPoints& points);

double jaccard_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

struct FeatureMatch {
  std::size_t a = 0;
  std::size_t b = 0;
  double score = 0.0;
};

struct MatchTable {
  std::vector<FeatureMatch> pairs;  // in the order they were matched
  std::vector<std::size_t> unmatched_a;
  std::vector<std::size_t> unmatched_b;
};

/// Greedy matching: repeatedly pairs the unmatched (a, b) with the highest
/// Jaccard index (ties to the lowest a, then lowest b).
MatchTable jaccard_match(const std::vector<std::vector<std::size_t>>& features_a,
                         const std::vector<std::vector<std::size_t>>& features_b);

struct FeatureReport {
  std::size_t slot = 0;
  std::vector<std::pair<std::string, double>> top;

  /// "label (0.78), label (0.72), ..."
  std::string format() const;
};

/// Per feature, the top_m (label, weight) pairs in descending weight.
/// Only the listed slots are reported when `features` is given; otherwise
/// every row with a non-zero weight.
std::vector<FeatureReport> top_features(const DenseMatrix<double>& b_mean,
                                        const std::vector<std::string>& col_labels,
                                        std::size_t top_m,
                                        const std::vector<std::size_t>* features = nullptr);

/// Posterior-mean z over live features thresholded at >= 0.5, as an
/// N x L count matrix with columns labelled "F<slot>".
CountMatrix binarize_posterior_z(const PosteriorSummary& summary,
                                 const std::vector<std::string>& row_labels);

/// Second-layer fit on the binarized first-layer features. Throws
/// std::invalid_argument if the binarization is all zero.
PosteriorSummary meta_features(const PosteriorSummary& summary,
                               const std::vector<std::string>& row_labels,
                               const ChainConfig& config);

struct FoldResult {
  std::size_t fold = 0;
  std::uint64_t mask_seed = 0;
  std::uint64_t chain_seed = 0;
  double log_perplexity = 0.0;
  double baseline_log_perplexity = 0.0;
  double coherence = 0.0;
  std::size_t live_features = 0;
};

struct EvalReport {
  std::vector<FoldResult> folds;
  double log_perplexity_mean = 0.0;
  double log_perplexity_std = 0.0;
  double coherence_mean = 0.0;
  double coherence_std = 0.0;
  QqPoints qq_model;     // fold 0
  QqPoints qq_baseline;  // binomial baseline, not a reproduction of any model
  std::vector<MatchTable> feature_matches;  // fold 0 against fold i, i >= 1
  std::size_t top_m = 10;
};

/// Mean and sample standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& values);

}  // namespace s3r
