#include "s3r/state.hpp"

#include <stdexcept>

namespace s3r {

std::size_t LatentState::row_sum(std::size_t n) const {
  std::size_t s = 0;
  for (auto v : z.row(n)) s += v;
  return s;
}

std::size_t LatentState::column_count(std::size_t k) const {
  std::size_t m = 0;
  for (std::size_t n = 0; n < z.rows(); ++n) m += z(n, k);
  return m;
}

std::size_t LatentState::k_plus() const {
  std::size_t out = 0;
  for (std::size_t k = 0; k < k_max(); ++k) out += column_count(k) > 0 ? 1 : 0;
  return out;
}

double row_rate(const LatentState& state, std::size_t n, std::size_t d) {
  if (n >= state.n_rows() || d >= state.n_cols()) throw std::out_of_range("row_rate: index out of range");
  double rate = 0.0;
  for (std::size_t k = 0; k < state.k_max(); ++k) {
    if (state.z(n, k)) rate += state.b(k, d);
  }
  return rate;
}

AuxAudit audit_aux(const LatentState& state, const CountMatrix& data, const ObservationMask& mask) {
  AuxAudit audit;
  const std::size_t K = state.k_max();
  for (std::size_t n = 0; n < data.n_rows(); ++n) {
    const auto cols = data.row_cols(n);
    const auto vals = data.row_values(n);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto aux = state.aux.row(data.row_offset(n) + i);
      const bool held = mask.is_held_out(n, cols[i]);
      std::int64_t total = 0;
      for (std::size_t k = 0; k < K; ++k) {
        total += aux[k];
        if (aux[k] > 0 && !state.z(n, k)) ++audit.support_violations;
      }
      if (held) {
        if (total != 0) ++audit.held_out_violations;
      } else if (total != vals[i]) {
        ++audit.sum_violations;
      }
    }
  }
  return audit;
}

double RetainedSample::rate(std::size_t n, std::size_t d) const {
  double r = 0.0;
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (z(n, j)) r += b(j, d);
  }
  return r;
}

RetainedSample retain(const LatentState& state) {
  RetainedSample s;
  s.alpha = state.alpha;
  for (std::size_t k = 0; k < state.k_max(); ++k) {
    if (state.column_count(k) > 0) s.features.push_back(static_cast<std::uint32_t>(k));
  }
  s.z = DenseMatrix<std::uint8_t>(state.n_rows(), s.features.size(), 0);
  s.b = DenseMatrix<double>(s.features.size(), state.n_cols(), 0.0);
  for (std::size_t j = 0; j < s.features.size(); ++j) {
    const std::size_t k = s.features[j];
    for (std::size_t n = 0; n < state.n_rows(); ++n) s.z(n, j) = state.z(n, k);
    for (std::size_t d = 0; d < state.n_cols(); ++d) s.b(j, d) = state.b(k, d);
  }
  return s;
}

double PosteriorSummary::acceptance_rate() const {
  return retained_proposals == 0 ? 0.0
                                 : static_cast<double>(retained_accepts) /
                                       static_cast<double>(retained_proposals);
}

void PosteriorSummary::compute_means() {
  z_mean = DenseMatrix<double>(n_rows, k_max, 0.0);
  b_mean = DenseMatrix<double>(k_max, n_cols, 0.0);
  if (samples.empty()) return;
  // Slots that are empty in a sample contribute z = 0 there. Their B is not
  // retained, so b_mean averages over samples in which the slot is live.
  std::vector<std::size_t> live_count(k_max, 0);
  for (const auto& s : samples) {
    for (std::size_t j = 0; j < s.features.size(); ++j) {
      const std::size_t k = s.features[j];
      ++live_count[k];
      for (std::size_t n = 0; n < n_rows; ++n) z_mean(n, k) += s.z(n, j);
      for (std::size_t d = 0; d < n_cols; ++d) b_mean(k, d) += s.b(j, d);
    }
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (double& v : z_mean.data()) v *= inv;
  for (std::size_t k = 0; k < k_max; ++k) {
    if (live_count[k] == 0) continue;
    const double w = 1.0 / static_cast<double>(live_count[k]);
    for (std::size_t d = 0; d < n_cols; ++d) b_mean(k, d) *= w;
  }
}

std::vector<std::size_t> PosteriorSummary::live_features() const {
  std::vector<std::size_t> live;
  if (n_rows == 0) return live;
  const double threshold = 1.0 / static_cast<double>(n_rows);
  for (std::size_t k = 0; k < k_max; ++k) {
    double total = 0.0;
    for (std::size_t n = 0; n < n_rows; ++n) total += z_mean(n, k);
    if (total / static_cast<double>(n_rows) > threshold) live.push_back(k);
  }
  return live;
}

}  // namespace s3r
