#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "s3r/count_matrix.hpp"
#include "s3r/hyper_params.hpp"
#include "s3r/random.hpp"
#include "s3r/sampler.hpp"
#include "s3r/state.hpp"

namespace s3r {

struct ChainConfig {
  HyperParams hp;
  int checkpoint_every = 0;  // iterations between checkpoints; 0 disables
  InitMode init = InitMode::kRandom;
  // Burn-in adaptation of the logit-space MH scale towards 20-40% acceptance.
  bool adapt_mh_step = true;
  int adapt_window = 50;
};

/// Everything needed to continue a chain exactly where it stopped.
struct ChainCheckpoint {
  static constexpr const char* kSchema = "s3r-ibp/chain-checkpoint";
  static constexpr int kVersion = 1;

  std::int64_t iteration = 0;  // completed iterations
  HyperParams hp;
  std::string hp_digest;
  LatentState state;
  std::string rng_state;
  double mh_step = 0.0;
  std::uint64_t window_proposals = 0;
  std::uint64_t window_accepts = 0;
  PosteriorSummary partial;  // retained samples and traces so far
};

/// Stable digest of a HyperParams value (FNV-1a over its canonical JSON).
std::string hyper_params_digest(const HyperParams& hp);

class ChainRunner {
 public:
  /// Validates the inputs and draws the initial state.
  ChainRunner(const CountMatrix& data, const ObservationMask& mask, ChainConfig config);
  /// Continues from a checkpoint; throws if the digest does not match.
  ChainRunner(const CountMatrix& data, const ObservationMask& mask, ChainConfig config,
              const ChainCheckpoint& checkpoint);

  std::int64_t iteration() const { return iteration_; }
  std::int64_t total_iterations() const;
  bool done() const { return iteration_ >= total_iterations(); }

  void step();
  /// Runs until done, calling `on_checkpoint` every checkpoint_every
  /// iterations (when configured). Stops early after `halt_at` iterations if
  /// that is positive.
  void run(const std::function<void(const ChainCheckpoint&)>& on_checkpoint = {},
           std::int64_t halt_at = 0);

  ChainCheckpoint checkpoint() const;
  /// Final summary; requires done().
  PosteriorSummary summary() const;
  const LatentState& state() const { return state_; }

 private:
  const CountMatrix& data_;
  const ObservationMask& mask_;
  ChainConfig config_;
  KernelSettings kernel_;
  LatentState state_;
  Rng rng_;
  std::int64_t iteration_ = 0;
  std::uint64_t window_proposals_ = 0;
  std::uint64_t window_accepts_ = 0;
  PosteriorSummary partial_;
  double elapsed_ = 0.0;
};

/// Runs a full chain: burn_in iterations discarded, then n_samples retained
/// every thin iterations. Deterministic given hp.seed.
PosteriorSummary run_chain(const CountMatrix& data, const ObservationMask& mask,
                           const ChainConfig& config,
                           const std::function<void(const ChainCheckpoint&)>& on_checkpoint = {});

/// log[(1/S) sum_s Poisson(x; sum_k z^s_nk B^s_kd)] over retained samples.
double predictive_log_lik(const PosteriorSummary& summary, std::size_t row, std::size_t col,
                          std::int64_t x);

}  // namespace s3r
