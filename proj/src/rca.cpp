#include "s3r/rca.hpp"

#include <cmath>
#include <stdexcept>

namespace s3r {

namespace {

void check_raw(const DenseMatrix<double>& raw, const std::vector<std::string>& row_labels,
               const std::vector<std::string>& col_labels) {
  if (raw.rows() == 0 || raw.cols() == 0) throw std::invalid_argument("rca: empty matrix");
  if (row_labels.size() != raw.rows() || col_labels.size() != raw.cols()) {
    throw std::invalid_argument("rca: label count does not match shape");
  }
  for (double v : raw.data()) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("rca: raw values must be finite and >= 0");
  }
}

}  // namespace

DenseMatrix<double> export_shares(const DenseMatrix<double>& raw,
                                  const std::vector<std::string>& row_labels,
                                  const std::vector<std::string>& col_labels) {
  check_raw(raw, row_labels, col_labels);
  DenseMatrix<double> shares(raw.rows(), raw.cols());
  for (std::size_t n = 0; n < raw.rows(); ++n) {
    double total = 0.0;
    for (double v : raw.row(n)) total += v;
    if (total <= 0.0) throw std::invalid_argument("rca: row '" + row_labels[n] + "' is all zero");
    for (std::size_t d = 0; d < raw.cols(); ++d) shares(n, d) = raw(n, d) / total;
  }
  return shares;
}

DenseMatrix<double> rca_index(const DenseMatrix<double>& raw,
                              const std::vector<std::string>& row_labels,
                              const std::vector<std::string>& col_labels) {
  DenseMatrix<double> out = export_shares(raw, row_labels, col_labels);
  std::vector<double> col_total(raw.cols(), 0.0);
  double grand = 0.0;
  for (std::size_t n = 0; n < raw.rows(); ++n) {
    for (std::size_t d = 0; d < raw.cols(); ++d) {
      col_total[d] += raw(n, d);
      grand += raw(n, d);
    }
  }
  for (std::size_t d = 0; d < raw.cols(); ++d) {
    if (col_total[d] <= 0.0) throw std::invalid_argument("rca: column '" + col_labels[d] + "' is all zero");
  }
  for (std::size_t n = 0; n < raw.rows(); ++n) {
    for (std::size_t d = 0; d < raw.cols(); ++d) out(n, d) /= col_total[d] / grand;
  }
  return out;
}

CountMatrix rca_transform(const DenseMatrix<double>& raw, std::vector<std::string> row_labels,
                          std::vector<std::string> col_labels, RcaMode mode) {
  const DenseMatrix<double> rca = rca_index(raw, row_labels, col_labels);
  std::vector<Triplet> entries;
  for (std::size_t n = 0; n < rca.rows(); ++n) {
    for (std::size_t d = 0; d < rca.cols(); ++d) {
      const double v = rca(n, d);
      const std::int64_t count = mode == RcaMode::kBinary ? (v >= 1.0 ? 1 : 0) : std::llround(v);
      if (count > 0) entries.push_back({n, d, count});
    }
  }
  return CountMatrix(rca.rows(), rca.cols(), std::move(entries), std::move(row_labels),
                     std::move(col_labels));
}

}  // namespace s3r
