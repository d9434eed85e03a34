#pragma once

#include <json.hpp>

#include "s3r/chain.hpp"
#include "s3r/count_matrix.hpp"
#include "s3r/hyper_params.hpp"
#include "s3r/state.hpp"

namespace s3r {

using Json = nlohmann::json;

// Matrices are stored as {"dtype", "shape", "data"} where data is the
// base64 of the little-endian row-major element bytes. This keeps doubles
// bit-exact and files compact.

Json to_json(const HyperParams& hp);
/// Missing keys keep their defaults; unknown keys are rejected.
HyperParams hyper_params_from_json(const Json& j);

Json to_json(const LatentState& state);
LatentState latent_state_from_json(const Json& j);

inline constexpr const char* kSummarySchema = "s3r-ibp/posterior-summary";
inline constexpr int kSummaryVersion = 1;

/// Elapsed wall-clock time is not part of the serialized summary.
Json to_json(const PosteriorSummary& summary);
PosteriorSummary summary_from_json(const Json& j);

Json to_json(const ChainCheckpoint& checkpoint);
ChainCheckpoint checkpoint_from_json(const Json& j);

}  // namespace s3r
