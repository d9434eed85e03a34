#include "s3r/serialization.hpp"

#include <bit>
#include <boost/beast/core/detail/base64.hpp>
#include <cstring>
#include <set>
#include <stdexcept>

namespace s3r {

static_assert(std::endian::native == std::endian::little,
              "matrix blobs assume a little-endian host");

namespace {

namespace b64 = boost::beast::detail::base64;

template <typename T>
constexpr const char* dtype_name() {
  if constexpr (std::is_same_v<T, double>) return "f64";
  if constexpr (std::is_same_v<T, std::int64_t>) return "i64";
  if constexpr (std::is_same_v<T, std::uint8_t>) return "u8";
  if constexpr (std::is_same_v<T, std::uint32_t>) return "u32";
}

template <typename T>
std::string encode_bytes(const std::vector<T>& values) {
  const std::size_t bytes = values.size() * sizeof(T);
  std::string out(b64::encoded_size(bytes), '\0');
  out.resize(b64::encode(out.data(), values.data(), bytes));
  return out;
}

template <typename T>
std::vector<T> decode_bytes(const std::string& text, std::size_t count) {
  std::string raw(b64::decoded_size(text.size()), '\0');
  const auto [written, read] = b64::decode(raw.data(), text.data(), text.size());
  const std::size_t body = text.find_last_not_of('=') + 1;  // the decoder stops at padding
  if (read != body || text.size() - body > 2 || written != count * sizeof(T)) {
    throw std::runtime_error("corrupt matrix blob");
  }
  std::vector<T> out(count);
  std::memcpy(out.data(), raw.data(), written);
  return out;
}

template <typename T>
Json matrix_json(const DenseMatrix<T>& m) {
  return Json{{"dtype", dtype_name<T>()},
              {"shape", {m.rows(), m.cols()}},
              {"data", encode_bytes(m.data())}};
}

template <typename T>
DenseMatrix<T> matrix_from_json(const Json& j) {
  if (j.at("dtype").get<std::string>() != dtype_name<T>()) {
    throw std::runtime_error("unexpected matrix dtype");
  }
  const auto rows = j.at("shape").at(0).get<std::size_t>();
  const auto cols = j.at("shape").at(1).get<std::size_t>();
  DenseMatrix<T> m(rows, cols);
  m.data() = decode_bytes<T>(j.at("data").get<std::string>(), rows * cols);
  return m;
}

template <typename T>
Json vector_json(const std::vector<T>& v) {
  return Json{{"dtype", dtype_name<T>()}, {"shape", {v.size()}}, {"data", encode_bytes(v)}};
}

template <typename T>
std::vector<T> vector_from_json(const Json& j) {
  if (j.at("dtype").get<std::string>() != dtype_name<T>()) {
    throw std::runtime_error("unexpected vector dtype");
  }
  return decode_bytes<T>(j.at("data").get<std::string>(), j.at("shape").at(0).get<std::size_t>());
}

void check_schema(const Json& j, const char* schema, int version) {
  if (!j.contains("schema") || j.at("schema").get<std::string>() != schema) {
    throw std::runtime_error(std::string("expected schema '") + schema + "'");
  }
  const int v = j.at("version").get<int>();
  if (v != version) {
    throw std::runtime_error(std::string("unsupported ") + schema + " version " + std::to_string(v));
  }
}

Json sample_json(const RetainedSample& s) {
  return Json{{"features", s.features},
              {"alpha", s.alpha},
              {"z", matrix_json(s.z)},
              {"b", matrix_json(s.b)}};
}

RetainedSample sample_from_json(const Json& j) {
  RetainedSample s;
  s.features = j.at("features").get<std::vector<std::uint32_t>>();
  s.alpha = j.at("alpha").get<double>();
  s.z = matrix_from_json<std::uint8_t>(j.at("z"));
  s.b = matrix_from_json<double>(j.at("b"));
  return s;
}

// Summary body without schema header; shared by summaries and checkpoints.
Json summary_body(const PosteriorSummary& s) {
  Json samples = Json::array();
  for (const auto& r : s.samples) samples.push_back(sample_json(r));
  return Json{{"n_rows", s.n_rows},
              {"n_cols", s.n_cols},
              {"k_max", s.k_max},
              {"samples", std::move(samples)},
              {"z_mean", matrix_json(s.z_mean)},
              {"b_mean", matrix_json(s.b_mean)},
              {"k_plus_trace", vector_json(s.k_plus_trace)},
              {"alpha_trace", vector_json(s.alpha_trace)},
              {"burn_in_proposals", s.burn_in_proposals},
              {"burn_in_accepts", s.burn_in_accepts},
              {"retained_proposals", s.retained_proposals},
              {"retained_accepts", s.retained_accepts},
              {"final_mh_step", s.final_mh_step}};
}

PosteriorSummary summary_from_body(const Json& j) {
  PosteriorSummary s;
  s.n_rows = j.at("n_rows").get<std::size_t>();
  s.n_cols = j.at("n_cols").get<std::size_t>();
  s.k_max = j.at("k_max").get<std::size_t>();
  for (const auto& r : j.at("samples")) s.samples.push_back(sample_from_json(r));
  s.z_mean = matrix_from_json<double>(j.at("z_mean"));
  s.b_mean = matrix_from_json<double>(j.at("b_mean"));
  s.k_plus_trace = vector_from_json<std::uint32_t>(j.at("k_plus_trace"));
  s.alpha_trace = vector_from_json<double>(j.at("alpha_trace"));
  s.burn_in_proposals = j.at("burn_in_proposals").get<std::uint64_t>();
  s.burn_in_accepts = j.at("burn_in_accepts").get<std::uint64_t>();
  s.retained_proposals = j.at("retained_proposals").get<std::uint64_t>();
  s.retained_accepts = j.at("retained_accepts").get<std::uint64_t>();
  s.final_mh_step = j.at("final_mh_step").get<double>();
  return s;
}

}  // namespace

Json to_json(const HyperParams& hp) {
  return Json{{"alpha_prior_shape", hp.alpha_prior_shape},
              {"alpha_prior_scale", hp.alpha_prior_scale},
              {"c", hp.c},
              {"sigma", hp.sigma},
              {"nb_r", hp.nb_r},
              {"nb_p", hp.nb_p},
              {"alpha_B", hp.alpha_B},
              {"mu_B", hp.mu_B},
              {"k_max", hp.k_max},
              {"eps_trunc", hp.eps_trunc},
              {"mh_step", hp.mh_step},
              {"burn_in", hp.burn_in},
              {"n_samples", hp.n_samples},
              {"thin", hp.thin},
              {"seed", hp.seed}};
}

HyperParams hyper_params_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("hyperparameters must be a JSON object");
  HyperParams hp;
  const Json defaults = to_json(hp);
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw std::invalid_argument("unknown hyperparameter '" + key + "'");
  }
  auto read = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  read("alpha_prior_shape", hp.alpha_prior_shape);
  read("alpha_prior_scale", hp.alpha_prior_scale);
  read("c", hp.c);
  read("sigma", hp.sigma);
  read("nb_r", hp.nb_r);
  read("nb_p", hp.nb_p);
  read("alpha_B", hp.alpha_B);
  read("mu_B", hp.mu_B);
  read("k_max", hp.k_max);
  read("eps_trunc", hp.eps_trunc);
  read("mh_step", hp.mh_step);
  read("burn_in", hp.burn_in);
  read("n_samples", hp.n_samples);
  read("thin", hp.thin);
  read("seed", hp.seed);
  hp.sigma = clamp_sigma(hp.sigma);
  hp.validate();
  return hp;
}

std::string hyper_params_digest(const HyperParams& hp) {
  // FNV-1a 64 over the canonical (sorted-key) dump.
  const std::string text = to_json(hp).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json to_json(const LatentState& state) {
  return Json{{"alpha", state.alpha},
              {"pi", vector_json(state.pi)},
              {"z", matrix_json(state.z)},
              {"b", matrix_json(state.b)},
              {"aux", matrix_json(state.aux)}};
}

LatentState latent_state_from_json(const Json& j) {
  LatentState s;
  s.alpha = j.at("alpha").get<double>();
  s.pi = vector_from_json<double>(j.at("pi"));
  s.z = matrix_from_json<std::uint8_t>(j.at("z"));
  s.b = matrix_from_json<double>(j.at("b"));
  s.aux = matrix_from_json<std::int64_t>(j.at("aux"));
  if (s.pi.size() != s.z.cols() || s.b.rows() != s.z.cols() || s.aux.cols() != s.z.cols()) {
    throw std::runtime_error("inconsistent latent state shapes");
  }
  return s;
}

Json to_json(const PosteriorSummary& summary) {
  Json j = summary_body(summary);
  j["schema"] = kSummarySchema;
  j["version"] = kSummaryVersion;
  return j;
}

PosteriorSummary summary_from_json(const Json& j) {
  check_schema(j, kSummarySchema, kSummaryVersion);
  return summary_from_body(j);
}

Json to_json(const ChainCheckpoint& cp) {
  return Json{{"schema", ChainCheckpoint::kSchema},
              {"version", ChainCheckpoint::kVersion},
              {"iteration", cp.iteration},
              {"hyper_params", to_json(cp.hp)},
              {"hyper_params_digest", cp.hp_digest},
              {"state", to_json(cp.state)},
              {"rng_state", cp.rng_state},
              {"mh_step", cp.mh_step},
              {"window_proposals", cp.window_proposals},
              {"window_accepts", cp.window_accepts},
              {"partial", summary_body(cp.partial)}};
}

ChainCheckpoint checkpoint_from_json(const Json& j) {
  check_schema(j, ChainCheckpoint::kSchema, ChainCheckpoint::kVersion);
  ChainCheckpoint cp;
  cp.iteration = j.at("iteration").get<std::int64_t>();
  cp.hp = hyper_params_from_json(j.at("hyper_params"));
  cp.hp_digest = j.at("hyper_params_digest").get<std::string>();
  if (cp.hp_digest != hyper_params_digest(cp.hp)) {
    throw std::runtime_error("checkpoint hyperparameter digest mismatch");
  }
  cp.state = latent_state_from_json(j.at("state"));
  cp.rng_state = j.at("rng_state").get<std::string>();
  cp.mh_step = j.at("mh_step").get<double>();
  cp.window_proposals = j.at("window_proposals").get<std::uint64_t>();
  cp.window_accepts = j.at("window_accepts").get<std::uint64_t>();
  cp.partial = summary_from_body(j.at("partial"));
  return cp;
}

}  // namespace s3r
