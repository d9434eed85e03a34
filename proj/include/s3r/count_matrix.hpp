#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace s3r {

struct Triplet {
  std::size_t row;
  std::size_t col;
  std::int64_t count;
};

struct SparsityStats {
  std::size_t nonzeros = 0;
  double density = 0.0;   // nonzeros / (N * D)
  double sparsity = 0.0;  // 1 - density
};

/// N x D matrix of non-negative integer counts, stored row-compressed.
/// Only positive counts are stored; absent entries are zero.
class CountMatrix {
 public:
  CountMatrix() = default;

  /// Duplicate (row, col) pairs and negative counts are rejected. Zero
  /// counts are dropped. Labels default to "r<i>" / "c<j>" when empty.
  CountMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<Triplet> entries,
              std::vector<std::string> row_labels = {},
              std::vector<std::string> col_labels = {});

  std::size_t n_rows() const { return row_labels_.size(); }
  std::size_t n_cols() const { return col_labels_.size(); }
  std::size_t nonzeros() const { return values_.size(); }

  std::int64_t at(std::size_t row, std::size_t col) const;

  /// Column indices and counts of the stored entries in `row`. The index of
  /// the first entry within the global nonzero order is `row_offset(row)`.
  std::span<const std::uint32_t> row_cols(std::size_t row) const;
  std::span<const std::int64_t> row_values(std::size_t row) const;
  std::size_t row_offset(std::size_t row) const { return row_ptr_[row]; }

  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const std::vector<std::string>& col_labels() const { return col_labels_; }

  std::vector<Triplet> triplets() const;
  SparsityStats stats() const;

  bool operator==(const CountMatrix&) const = default;

 private:
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_idx_;
  std::vector<std::int64_t> values_;
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
};

/// Set of held-out (row, col) cells; everything else is training data.
class ObservationMask {
 public:
  ObservationMask() = default;
  ObservationMask(std::size_t n_rows, std::size_t n_cols);
  ObservationMask(std::size_t n_rows, std::size_t n_cols,
                  const std::vector<std::pair<std::size_t, std::size_t>>& held_out);

  static ObservationMask hold_out_all(std::size_t n_rows, std::size_t n_cols);

  std::size_t n_rows() const { return held_out_by_row_.size(); }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t held_out_count() const { return count_; }
  bool empty() const { return count_ == 0; }

  bool is_held_out(std::size_t row, std::size_t col) const;
  /// Sorted held-out columns of `row`.
  std::span<const std::uint32_t> held_out_cols(std::size_t row) const {
    return held_out_by_row_[row];
  }
  std::vector<std::pair<std::size_t, std::size_t>> cells() const;

  bool operator==(const ObservationMask&) const = default;

 private:
  std::size_t n_cols_ = 0;
  std::size_t count_ = 0;
  std::vector<std::vector<std::uint32_t>> held_out_by_row_;
};

}  // namespace s3r
