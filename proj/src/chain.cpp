#include "s3r/chain.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "s3r/densities.hpp"
#include "s3r/serialization.hpp"

namespace s3r {

ChainRunner::ChainRunner(const CountMatrix& data, const ObservationMask& mask, ChainConfig config)
    : data_(data),
      mask_(mask),
      config_(std::move(config)),
      kernel_(config_.hp),
      rng_(make_rng(config_.hp.seed)) {
  if (mask.n_rows() != data.n_rows() || mask.n_cols() != data.n_cols()) {
    throw std::invalid_argument("ChainRunner: mask shape does not match data");
  }
  state_ = initialize_state(data_, mask_, config_.hp, config_.init, rng_);
  partial_.n_rows = data_.n_rows();
  partial_.n_cols = data_.n_cols();
  partial_.k_max = static_cast<std::size_t>(config_.hp.k_max);
}

ChainRunner::ChainRunner(const CountMatrix& data, const ObservationMask& mask, ChainConfig config,
                         const ChainCheckpoint& checkpoint)
    : data_(data),
      mask_(mask),
      config_(std::move(config)),
      kernel_(config_.hp),
      rng_(deserialize_rng(checkpoint.rng_state)) {
  if (checkpoint.hp_digest != hyper_params_digest(config_.hp)) {
    throw std::invalid_argument("checkpoint was written with different hyperparameters");
  }
  if (checkpoint.state.n_rows() != data.n_rows() || checkpoint.state.n_cols() != data.n_cols() ||
      checkpoint.state.aux.rows() != data.nonzeros()) {
    throw std::invalid_argument("checkpoint state does not match the data shape");
  }
  state_ = checkpoint.state;
  iteration_ = checkpoint.iteration;
  kernel_.mh_step = checkpoint.mh_step;
  window_proposals_ = checkpoint.window_proposals;
  window_accepts_ = checkpoint.window_accepts;
  partial_ = checkpoint.partial;
}

std::int64_t ChainRunner::total_iterations() const {
  return static_cast<std::int64_t>(config_.hp.burn_in) +
         static_cast<std::int64_t>(config_.hp.n_samples) * config_.hp.thin;
}

void ChainRunner::step() {
  if (done()) throw std::logic_error("ChainRunner::step: chain already finished");
  const IterationInfo info = mcmc_iteration(state_, data_, mask_, kernel_, rng_);
  ++iteration_;
  partial_.k_plus_trace.push_back(static_cast<std::uint32_t>(state_.k_plus()));
  partial_.alpha_trace.push_back(state_.alpha);

  if (iteration_ <= config_.hp.burn_in) {
    partial_.burn_in_proposals += info.pi_proposals;
    partial_.burn_in_accepts += info.pi_accepts;
    if (config_.adapt_mh_step && config_.adapt_window > 0) {
      window_proposals_ += info.pi_proposals;
      window_accepts_ += info.pi_accepts;
      if (iteration_ % config_.adapt_window == 0 && window_proposals_ > 0) {
        const double rate =
            static_cast<double>(window_accepts_) / static_cast<double>(window_proposals_);
        if (rate < 0.2) kernel_.mh_step *= 0.8;
        if (rate > 0.4) kernel_.mh_step *= 1.25;
        window_proposals_ = 0;
        window_accepts_ = 0;
      }
    }
    return;
  }
  partial_.retained_proposals += info.pi_proposals;
  partial_.retained_accepts += info.pi_accepts;
  if ((iteration_ - config_.hp.burn_in) % config_.hp.thin == 0) {
    partial_.samples.push_back(retain(state_));
  }
}

void ChainRunner::run(const std::function<void(const ChainCheckpoint&)>& on_checkpoint,
                      std::int64_t halt_at) {
  const auto start = std::chrono::steady_clock::now();
  while (!done()) {
    if (halt_at > 0 && iteration_ >= halt_at) break;
    step();
    if (on_checkpoint && config_.checkpoint_every > 0 &&
        iteration_ % config_.checkpoint_every == 0) {
      on_checkpoint(checkpoint());
    }
  }
  elapsed_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ChainCheckpoint ChainRunner::checkpoint() const {
  ChainCheckpoint cp;
  cp.iteration = iteration_;
  cp.hp = config_.hp;
  cp.hp_digest = hyper_params_digest(config_.hp);
  cp.state = state_;
  cp.rng_state = serialize_rng(rng_);
  cp.mh_step = kernel_.mh_step;
  cp.window_proposals = window_proposals_;
  cp.window_accepts = window_accepts_;
  cp.partial = partial_;
  return cp;
}

PosteriorSummary ChainRunner::summary() const {
  if (!done()) throw std::logic_error("ChainRunner::summary: chain not finished");
  PosteriorSummary out = partial_;
  out.final_mh_step = kernel_.mh_step;
  out.elapsed_seconds = elapsed_;
  out.compute_means();
  return out;
}

PosteriorSummary run_chain(const CountMatrix& data, const ObservationMask& mask,
                           const ChainConfig& config,
                           const std::function<void(const ChainCheckpoint&)>& on_checkpoint) {
  ChainRunner runner(data, mask, config);
  runner.run(on_checkpoint);
  return runner.summary();
}

double predictive_log_lik(const PosteriorSummary& summary, std::size_t row, std::size_t col,
                          std::int64_t x) {
  if (summary.samples.empty()) throw std::invalid_argument("predictive_log_lik: no retained samples");
  if (row >= summary.n_rows || col >= summary.n_cols) {
    throw std::out_of_range("predictive_log_lik: cell out of range");
  }
  double acc = kNegInf;
  for (const auto& s : summary.samples) acc = log_add_exp(acc, poisson_log_pmf(x, s.rate(row, col)));
  return acc - std::log(static_cast<double>(summary.samples.size()));
}

}  // namespace s3r
