#include "s3r/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "s3r/densities.hpp"

namespace s3r {

namespace {

std::vector<double> sorted_row_nonzeros(const CountMatrix& data) {
  std::vector<double> out(data.n_rows());
  for (std::size_t n = 0; n < data.n_rows(); ++n) out[n] = static_cast<double>(data.row_cols(n).size());
  std::sort(out.begin(), out.end());
  return out;
}

// Pairs sorted empirical counts with the mean of sorted replicate counts.
template <typename DrawRowCounts>
QqPoints qq_pairing(const CountMatrix& data, std::size_t n_draws, DrawRowCounts&& draw) {
  if (n_draws == 0) throw std::invalid_argument("qq: n_draws must be at least 1");
  const std::vector<double> empirical = sorted_row_nonzeros(data);
  std::vector<double> mean(data.n_rows(), 0.0);
  std::vector<double> counts(data.n_rows());
  for (std::size_t r = 0; r < n_draws; ++r) {
    draw(counts);
    std::sort(counts.begin(), counts.end());
    for (std::size_t n = 0; n < counts.size(); ++n) mean[n] += counts[n];
  }
  QqPoints out(data.n_rows());
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = {empirical[n], mean[n] / static_cast<double>(n_draws)};
  }
  return out;
}

}  // namespace

double log_perplexity(const PosteriorSummary& summary, const CountMatrix& data,
                      const ObservationMask& mask) {
  if (mask.empty()) throw std::invalid_argument("log_perplexity: no held-out cells");
  double total = 0.0;
  for (const auto& [n, d] : mask.cells()) total += predictive_log_lik(summary, n, d, data.at(n, d));
  return -total / static_cast<double>(mask.held_out_count());
}

double row_mean_baseline_log_perplexity(const CountMatrix& data, const ObservationMask& mask) {
  if (mask.empty()) throw std::invalid_argument("row_mean_baseline_log_perplexity: no held-out cells");
  double total = 0.0;
  for (std::size_t n = 0; n < data.n_rows(); ++n) {
    const auto held = mask.held_out_cols(n);
    if (held.empty()) continue;
    const std::size_t n_train = data.n_cols() - held.size();
    double row_total = 0.0;
    const auto cols = data.row_cols(n);
    const auto vals = data.row_values(n);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (!mask.is_held_out(n, cols[i])) row_total += static_cast<double>(vals[i]);
    }
    const double rate = n_train == 0 ? 0.0 : row_total / static_cast<double>(n_train);
    for (auto d : held) total += poisson_log_pmf(data.at(n, d), rate);
  }
  return -total / static_cast<double>(mask.held_out_count());
}

std::vector<std::size_t> top_columns(std::span<const double> weights, std::size_t top_m) {
  std::vector<std::size_t> idx(weights.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
  idx.resize(std::min(top_m, idx.size()));
  return idx;
}

double umass_coherence(const DenseMatrix<double>& b_mean, const CountMatrix& data,
                       std::size_t top_m, const std::vector<std::size_t>* features) {
  if (top_m == 0) throw std::invalid_argument("umass_coherence: top_m must be at least 1");
  if (b_mean.cols() != data.n_cols()) throw std::invalid_argument("umass_coherence: shape mismatch");
  std::vector<std::size_t> slots;
  if (features != nullptr) {
    slots = *features;
  } else {
    slots.resize(b_mean.rows());
    std::iota(slots.begin(), slots.end(), 0);
  }

  // Document sets per column (rows with x > 0).
  std::vector<std::vector<std::uint32_t>> docs(data.n_cols());
  for (std::size_t n = 0; n < data.n_rows(); ++n) {
    for (auto d : data.row_cols(n)) docs[d].push_back(static_cast<std::uint32_t>(n));
  }
  auto co_occurrence = [&](std::size_t u, std::size_t v) {
    std::vector<std::uint32_t> both;
    std::set_intersection(docs[u].begin(), docs[u].end(), docs[v].begin(), docs[v].end(),
                          std::back_inserter(both));
    return static_cast<double>(both.size());
  };

  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t k : slots) {
    const auto weights = b_mean.row(k);
    if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) continue;
    const auto top = top_columns(weights, top_m);
    double c = 0.0;
    for (std::size_t m = 1; m < top.size(); ++m) {
      for (std::size_t l = 0; l < m; ++l) {
        const double dl = static_cast<double>(docs[top[l]].size());
        if (dl == 0.0) continue;
        c += std::log((co_occurrence(top[m], top[l]) + 1.0) / dl);
      }
    }
    total += c;
    ++used;
  }
  if (used == 0) throw std::invalid_argument("umass_coherence: every feature has zero weights");
  return total / static_cast<double>(used);
}

QqPoints qq_row_nonzeros(const PosteriorSummary& summary, const CountMatrix& data,
                         std::size_t n_draws, Rng& rng) {
  if (summary.samples.empty()) throw std::invalid_argument("qq_row_nonzeros: no retained samples");
  const std::size_t S = summary.samples.size();
  return qq_pairing(data, n_draws, [&](std::vector<double>& counts) {
    const auto pick = std::uniform_int_distribution<std::size_t>(0, S - 1)(rng);
    const RetainedSample& s = summary.samples[pick];
    for (std::size_t n = 0; n < data.n_rows(); ++n) {
      double c = 0.0;
      for (std::size_t d = 0; d < data.n_cols(); ++d) {
        // P(Poisson(lambda) > 0) = 1 - exp(-lambda)
        c += bernoulli(-std::expm1(-s.rate(n, d)), rng) ? 1.0 : 0.0;
      }
      counts[n] = c;
    }
  });
}

QqPoints binomial_baseline_qq(const CountMatrix& data, std::size_t n_draws, Rng& rng) {
  std::vector<double> row_k(data.n_rows(), 0.0);
  std::vector<double> col_k(data.n_cols(), 0.0);
  for (std::size_t n = 0; n < data.n_rows(); ++n) {
    for (auto d : data.row_cols(n)) {
      row_k[n] += 1.0;
      col_k[d] += 1.0;
    }
  }
  const double total = static_cast<double>(data.nonzeros());
  return qq_pairing(data, n_draws, [&](std::vector<double>& counts) {
    for (std::size_t n = 0; n < data.n_rows(); ++n) {
      double c = 0.0;
      for (std::size_t d = 0; d < data.n_cols(); ++d) {
        const double p = total == 0.0 ? 0.0 : std::min(1.0, row_k[n] * col_k[d] / total);
        c += bernoulli(p, rng) ? 1.0 : 0.0;
      }
      counts[n] = c;
    }
  });
}

double qq_mean_abs_gap(const QqPoints& points) {
  if (points.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [e, p] : points) total += std::abs(e - p);
  return total / static_cast<double>(points.size());
}

double jaccard_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> sa = a;
  std::vector<std::size_t> sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  std::vector<std::size_t> inter;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  const std::size_t uni = sa.size() + sb.size() - inter.size();
  return uni == 0 ? 1.0 : static_cast<double>(inter.size()) / static_cast<double>(uni);
}

MatchTable jaccard_match(const std::vector<std::vector<std::size_t>>& features_a,
                         const std::vector<std::vector<std::size_t>>& features_b) {
  const std::size_t A = features_a.size();
  const std::size_t B = features_b.size();
  DenseMatrix<double> score(A, B);
  for (std::size_t i = 0; i < A; ++i) {
    for (std::size_t j = 0; j < B; ++j) score(i, j) = jaccard_index(features_a[i], features_b[j]);
  }
  std::vector<bool> used_a(A, false);
  std::vector<bool> used_b(B, false);
  MatchTable table;
  for (std::size_t round = 0; round < std::min(A, B); ++round) {
    double best = -1.0;
    std::size_t bi = 0;
    std::size_t bj = 0;
    for (std::size_t i = 0; i < A; ++i) {
      if (used_a[i]) continue;
      for (std::size_t j = 0; j < B; ++j) {
        if (!used_b[j] && score(i, j) > best) {
          best = score(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    used_a[bi] = true;
    used_b[bj] = true;
    table.pairs.push_back({bi, bj, best});
  }
  for (std::size_t i = 0; i < A; ++i) {
    if (!used_a[i]) table.unmatched_a.push_back(i);
  }
  for (std::size_t j = 0; j < B; ++j) {
    if (!used_b[j]) table.unmatched_b.push_back(j);
  }
  return table;
}

std::string FeatureReport::format() const {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < top.size(); ++i) {
    if (i > 0) out += ", ";
    std::snprintf(buf, sizeof(buf), " (%.2f)", top[i].second);
    out += top[i].first + buf;
  }
  return out;
}

std::vector<FeatureReport> top_features(const DenseMatrix<double>& b_mean,
                                        const std::vector<std::string>& col_labels,
                                        std::size_t top_m,
                                        const std::vector<std::size_t>* features) {
  if (top_m == 0) throw std::invalid_argument("top_features: top_m must be at least 1");
  if (col_labels.size() != b_mean.cols()) throw std::invalid_argument("top_features: label count mismatch");
  std::vector<std::size_t> slots;
  if (features != nullptr) {
    slots = *features;
  } else {
    for (std::size_t k = 0; k < b_mean.rows(); ++k) {
      const auto w = b_mean.row(k);
      if (std::any_of(w.begin(), w.end(), [](double v) { return v != 0.0; })) slots.push_back(k);
    }
  }
  std::vector<FeatureReport> out;
  for (std::size_t k : slots) {
    FeatureReport r;
    r.slot = k;
    for (std::size_t d : top_columns(b_mean.row(k), top_m)) r.top.emplace_back(col_labels[d], b_mean(k, d));
    out.push_back(std::move(r));
  }
  return out;
}

CountMatrix binarize_posterior_z(const PosteriorSummary& summary,
                                 const std::vector<std::string>& row_labels) {
  const std::vector<std::size_t> live = summary.live_features();
  if (live.empty()) throw std::invalid_argument("binarize_posterior_z: no live features");
  std::vector<Triplet> entries;
  std::vector<std::string> labels;
  for (std::size_t j = 0; j < live.size(); ++j) {
    labels.push_back("F" + std::to_string(live[j]));
    for (std::size_t n = 0; n < summary.n_rows; ++n) {
      if (summary.z_mean(n, live[j]) >= 0.5) entries.push_back({n, j, 1});
    }
  }
  if (entries.empty()) throw std::invalid_argument("binarize_posterior_z: binarized matrix is all zero");
  return CountMatrix(summary.n_rows, live.size(), std::move(entries), row_labels, std::move(labels));
}

PosteriorSummary meta_features(const PosteriorSummary& summary,
                               const std::vector<std::string>& row_labels,
                               const ChainConfig& config) {
  const CountMatrix layer = binarize_posterior_z(summary, row_labels);
  const ObservationMask none(layer.n_rows(), layer.n_cols());
  return run_chain(layer, none, config);
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

}  // namespace s3r
