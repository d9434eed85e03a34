#pragma once

#include <string>
#include <vector>

#include "s3r/count_matrix.hpp"
#include "s3r/matrix.hpp"

namespace s3r {

enum class RcaMode { kRound, kBinary };

/// Per-row export shares E_nd / sum_d E_nd. Each row sums to one.
DenseMatrix<double> export_shares(const DenseMatrix<double>& raw,
                                  const std::vector<std::string>& row_labels,
                                  const std::vector<std::string>& col_labels);

/// Balassa index RCA_nd = (E_nd / sum_d E_nd) / (sum_n E_nd / sum_nd E_nd).
/// Throws std::invalid_argument naming the first all-zero row or column.
DenseMatrix<double> rca_index(const DenseMatrix<double>& raw,
                              const std::vector<std::string>& row_labels,
                              const std::vector<std::string>& col_labels);

/// Balassa index discretized to counts: nearest integer (kRound) or the
/// indicator RCA >= 1 (kBinary).
CountMatrix rca_transform(const DenseMatrix<double>& raw, std::vector<std::string> row_labels,
                          std::vector<std::string> col_labels, RcaMode mode = RcaMode::kRound);

}  // namespace s3r
