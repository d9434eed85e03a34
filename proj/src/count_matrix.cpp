#include "s3r/count_matrix.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace s3r {

namespace {

std::vector<std::string> default_labels(std::size_t n, char prefix) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

void check_unique(const std::vector<std::string>& labels, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw std::invalid_argument(std::string("duplicate ") + what + " label '" + l + "'");
    }
  }
}

}  // namespace

CountMatrix::CountMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<Triplet> entries,
                         std::vector<std::string> row_labels,
                         std::vector<std::string> col_labels)
    : row_labels_(std::move(row_labels)), col_labels_(std::move(col_labels)) {
  if (n_rows == 0 || n_cols == 0) throw std::invalid_argument("CountMatrix: empty shape");
  if (row_labels_.empty()) row_labels_ = default_labels(n_rows, 'r');
  if (col_labels_.empty()) col_labels_ = default_labels(n_cols, 'c');
  if (row_labels_.size() != n_rows || col_labels_.size() != n_cols) {
    throw std::invalid_argument("CountMatrix: label count does not match shape");
  }
  check_unique(row_labels_, "row");
  check_unique(col_labels_, "column");

  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(n_rows + 1, 0);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& t = entries[i];
    if (t.row >= n_rows || t.col >= n_cols) throw std::out_of_range("CountMatrix: entry out of range");
    if (t.count < 0) throw std::invalid_argument("CountMatrix: negative count");
    if (i > 0 && entries[i - 1].row == t.row && entries[i - 1].col == t.col) {
      throw std::invalid_argument("CountMatrix: duplicate entry (" + row_labels_[t.row] + ", " +
                                  col_labels_[t.col] + ")");
    }
    if (t.count == 0) continue;
    col_idx_.push_back(static_cast<std::uint32_t>(t.col));
    values_.push_back(t.count);
    ++row_ptr_[t.row + 1];
  }
  for (std::size_t r = 0; r < n_rows; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

std::int64_t CountMatrix::at(std::size_t row, std::size_t col) const {
  const auto cols = row_cols(row);
  const auto it = std::lower_bound(cols.begin(), cols.end(), col);
  if (it == cols.end() || *it != col) return 0;
  return values_[row_ptr_[row] + static_cast<std::size_t>(it - cols.begin())];
}

std::span<const std::uint32_t> CountMatrix::row_cols(std::size_t row) const {
  return {col_idx_.data() + row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]};
}

std::span<const std::int64_t> CountMatrix::row_values(std::size_t row) const {
  return {values_.data() + row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]};
}

std::vector<Triplet> CountMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(values_.size());
  for (std::size_t r = 0; r < n_rows(); ++r) {
    for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
      out.push_back({r, col_idx_[i], values_[i]});
    }
  }
  return out;
}

SparsityStats CountMatrix::stats() const {
  SparsityStats s;
  s.nonzeros = nonzeros();
  s.density = static_cast<double>(s.nonzeros) / static_cast<double>(n_rows() * n_cols());
  s.sparsity = 1.0 - s.density;
  return s;
}

ObservationMask::ObservationMask(std::size_t n_rows, std::size_t n_cols)
    : n_cols_(n_cols), held_out_by_row_(n_rows) {}

ObservationMask::ObservationMask(std::size_t n_rows, std::size_t n_cols,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& held_out)
    : ObservationMask(n_rows, n_cols) {
  for (const auto& [r, c] : held_out) {
    if (r >= n_rows || c >= n_cols) throw std::out_of_range("ObservationMask: cell out of range");
    held_out_by_row_[r].push_back(static_cast<std::uint32_t>(c));
  }
  for (auto& cols : held_out_by_row_) {
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    count_ += cols.size();
  }
}

ObservationMask ObservationMask::hold_out_all(std::size_t n_rows, std::size_t n_cols) {
  ObservationMask m(n_rows, n_cols);
  for (auto& cols : m.held_out_by_row_) {
    cols.resize(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) cols[c] = static_cast<std::uint32_t>(c);
  }
  m.count_ = n_rows * n_cols;
  return m;
}

bool ObservationMask::is_held_out(std::size_t row, std::size_t col) const {
  const auto& cols = held_out_by_row_[row];
  return std::binary_search(cols.begin(), cols.end(), static_cast<std::uint32_t>(col));
}

std::vector<std::pair<std::size_t, std::size_t>> ObservationMask::cells() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(count_);
  for (std::size_t r = 0; r < held_out_by_row_.size(); ++r) {
    for (auto c : held_out_by_row_[r]) out.emplace_back(r, c);
  }
  return out;
}

}  // namespace s3r
