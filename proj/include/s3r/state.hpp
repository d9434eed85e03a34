#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "s3r/count_matrix.hpp"
#include "s3r/matrix.hpp"

namespace s3r {

/// One MCMC state. `aux` has one row per stored nonzero of the data matrix
/// (in the matrix's row-compressed order) and one column per feature slot;
/// rows of held-out entries stay zero.
struct LatentState {
  DenseMatrix<std::uint8_t> z;  // N x K
  DenseMatrix<double> b;        // K x D
  std::vector<double> pi;       // K
  double alpha = 1.0;
  DenseMatrix<std::int64_t> aux;  // nnz x K

  std::size_t n_rows() const { return z.rows(); }
  std::size_t k_max() const { return z.cols(); }
  std::size_t n_cols() const { return b.cols(); }
  std::size_t row_sum(std::size_t n) const;
  std::size_t column_count(std::size_t k) const;
  /// Number of non-empty columns of z.
  std::size_t k_plus() const;

  bool operator==(const LatentState&) const = default;
};

/// sum_k z_nk B_kd.
double row_rate(const LatentState& state, std::size_t n, std::size_t d);

struct AuxAudit {
  std::size_t sum_violations = 0;      // training entries with sum_k x'_k != x
  std::size_t support_violations = 0;  // x'_k > 0 while z_nk = 0
  std::size_t held_out_violations = 0; // non-zero aux on held-out entries

  bool ok() const { return sum_violations + support_violations + held_out_violations == 0; }
};

AuxAudit audit_aux(const LatentState& state, const CountMatrix& data, const ObservationMask& mask);

/// A retained posterior sample, restricted to its non-empty feature slots.
struct RetainedSample {
  std::vector<std::uint32_t> features;  // slot indices, ascending
  DenseMatrix<std::uint8_t> z;          // N x features.size()
  DenseMatrix<double> b;                // features.size() x D
  double alpha = 0.0;

  double rate(std::size_t n, std::size_t d) const;
  bool operator==(const RetainedSample&) const = default;
};

RetainedSample retain(const LatentState& state);

struct PosteriorSummary {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::size_t k_max = 0;
  std::vector<RetainedSample> samples;
  DenseMatrix<double> z_mean;  // N x K
  DenseMatrix<double> b_mean;  // K x D
  std::vector<std::uint32_t> k_plus_trace;  // every iteration, burn-in included
  std::vector<double> alpha_trace;
  std::uint64_t burn_in_proposals = 0;
  std::uint64_t burn_in_accepts = 0;
  std::uint64_t retained_proposals = 0;
  std::uint64_t retained_accepts = 0;
  double final_mh_step = 0.0;
  // Wall-clock time is kept out of serialized summaries so that reruns
  // compare byte-for-byte.
  double elapsed_seconds = 0.0;

  double acceptance_rate() const;
  /// Recomputes z_mean and b_mean from the retained samples.
  void compute_means();
  /// Feature slots whose posterior-mean activity exceeds 1 / N.
  std::vector<std::size_t> live_features() const;
};

}  // namespace s3r
