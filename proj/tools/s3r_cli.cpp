// s3r_cli: fit, evaluate and inspect the sparse restricted IBP Poisson
// factorization from the command line. Run with --help for the commands.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "s3r/chain.hpp"
#include "s3r/eval.hpp"
#include "s3r/ibp_priors.hpp"
#include "s3r/io.hpp"
#include "s3r/serialization.hpp"

namespace fs = std::filesystem;
using namespace s3r;

namespace {

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void print_error(const char* kind, const std::string& message) {
  std::cerr << Json{{"error", kind}, {"message", message}}.dump() << '\n';
}

// Flags shared by every subcommand. Values only override the config file
// when given on the command line.
struct CommonFlags {
  std::string config;
  std::string data;
  std::string format = "dense";
  std::string preprocess = "none";
  std::string out;
  std::uint64_t seed = 0;
  int k_max = 0, burn_in = 0, samples = 0, thin = 0;
  double alpha_b = 0, mu_b = 0, c = 0, sigma = 0, nb_r = 0, nb_p = 0, holdout = 0;
  std::size_t folds = 0;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> setters;

  template <typename T>
  void add(CLI::App* app, const std::string& name, T& target, const std::string& help,
           std::function<void(RunConfig&)> apply) {
    setters.emplace_back(app->add_option(name, target, help), std::move(apply));
  }

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON run config; flags override its values");
    add(app, "--data", data, "count matrix file", [this](RunConfig& r) { r.dataset = data; });
    add(app, "--format", format, "dense or triplet", [this](RunConfig& r) { r.format = parse_file_format(format); });
    add(app, "--preprocess", preprocess, "none, rca-round or rca-binary",
        [this](RunConfig& r) { r.preprocess = parse_preprocess(preprocess); });
    add(app, "--out", out, "output directory", [this](RunConfig& r) { r.out = out; });
    add(app, "--seed", seed, "random seed", [this](RunConfig& r) { r.hp.seed = seed; });
    add(app, "--k-max", k_max, "feature slots", [this](RunConfig& r) { r.hp.k_max = k_max; });
    add(app, "--burn-in", burn_in, "burn-in iterations", [this](RunConfig& r) { r.hp.burn_in = burn_in; });
    add(app, "--samples", samples, "retained samples", [this](RunConfig& r) { r.hp.n_samples = samples; });
    add(app, "--thin", thin, "iterations per retained sample", [this](RunConfig& r) { r.hp.thin = thin; });
    add(app, "--alpha-b", alpha_b, "Gamma shape of B", [this](RunConfig& r) { r.hp.alpha_B = alpha_b; });
    add(app, "--mu-b", mu_b, "Gamma mean of B", [this](RunConfig& r) { r.hp.mu_B = mu_b; });
    add(app, "--c", c, "concentration", [this](RunConfig& r) { r.hp.c = c; });
    add(app, "--sigma", sigma, "stable exponent in [0, 1]", [this](RunConfig& r) { r.hp.sigma = clamp_sigma(sigma); });
    add(app, "--nb-r", nb_r, "row-sum prior r", [this](RunConfig& r) { r.hp.nb_r = nb_r; });
    add(app, "--nb-p", nb_p, "row-sum prior p", [this](RunConfig& r) { r.hp.nb_p = nb_p; });
    add(app, "--folds", folds, "number of splits", [this](RunConfig& r) { r.folds = folds; });
    add(app, "--holdout", holdout, "held-out fraction per split", [this](RunConfig& r) { r.holdout = holdout; });
  }

  RunConfig resolve(const Json& options) const {
    RunConfig rc;
    if (!config.empty()) {
      const Json j = read_json(config);
      rc = j.contains("schema") ? run_config_from_record(j) : run_config_from_json(j);
    }
    for (const auto& [opt, apply] : setters) {
      if (opt->count() > 0) apply(rc);
    }
    for (const auto& [k, v] : options.items()) rc.options[k] = v;
    if (rc.out.empty()) throw UsageError("--out is required");
    if (!rc.dataset.empty()) rc.dataset = fs::absolute(rc.dataset).lexically_normal().string();
    rc.out = fs::absolute(rc.out).lexically_normal().string();
    try {
      rc.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return rc;
  }
};

CountMatrix load_dataset(const RunConfig& rc) {
  if (rc.dataset.empty()) throw UsageError("--data is required");
  const CountMatrix data = load_counts(rc.dataset, rc.format, rc.preprocess);
  const SparsityStats st = data.stats();
  spdlog::info("loaded {} x {} matrix: {} non-zeros, density {:.4f}, sparsity {:.4f}", data.n_rows(),
               data.n_cols(), st.nonzeros, st.density, st.sparsity);
  return data;
}

void prepare_out(const RunConfig& rc) {
  fs::create_directories(rc.out);
  write_file_atomic(fs::path(rc.out) / "run_config.json", run_record(rc).dump(2) + "\n");
}

void write_json(const RunConfig& rc, const std::string& name, const Json& j) {
  write_file_atomic(fs::path(rc.out) / name, j.dump() + "\n");
}

ObservationMask mask_for(const CountMatrix& data, const RunConfig& rc, long fold) {
  if (fold < 0) return ObservationMask(data.n_rows(), data.n_cols());
  if (static_cast<std::size_t>(fold) >= rc.folds) throw UsageError("--fold must be below --folds");
  return make_split(data, rc.holdout, rc.hp.seed, static_cast<std::size_t>(fold));
}

PosteriorSummary load_summary(const std::string& path) {
  if (path.empty()) throw UsageError("--summary is required");
  return summary_from_json(read_json(path));
}

std::string qq_table(const QqPoints& model, const QqPoints& baseline) {
  std::ostringstream out;
  out << "empirical\tmodel\tbinomial_baseline\n";
  char buf[96];
  for (std::size_t i = 0; i < model.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6g\t%.6g\t%.6g\n", model[i].first, model[i].second,
                  baseline[i].second);
    out << buf;
  }
  return out.str();
}

std::string topics_table(const std::vector<FeatureReport>& reports) {
  std::ostringstream out;
  out << "feature\tslot\ttop\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << 'F' << i << '\t' << reports[i].slot << '\t' << reports[i].format() << '\n';
  }
  return out.str();
}

std::vector<std::vector<std::size_t>> top_sets(const PosteriorSummary& s, std::size_t top_m) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t k : s.live_features()) out.push_back(top_columns(s.b_mean.row(k), top_m));
  return out;
}

Json match_json(const MatchTable& t) {
  Json pairs = Json::array();
  for (const auto& p : t.pairs) pairs.push_back({{"a", p.a}, {"b", p.b}, {"jaccard", p.score}});
  return {{"pairs", pairs}, {"unmatched_a", t.unmatched_a}, {"unmatched_b", t.unmatched_b}};
}

ChainConfig chain_config(const RunConfig& rc) {
  ChainConfig cc;
  cc.hp = rc.hp;
  cc.checkpoint_every = rc.options.value("checkpoint_every", 0);
  return cc;
}

int cmd_generate(const RunConfig& rc) {
  const std::string prior = rc.options.at("prior");
  const auto rows = rc.options.at("rows").get<std::size_t>();
  const auto reps = rc.options.value("replicates", std::size_t{1});
  const std::optional<double> alpha =
      rc.options.contains("alpha") ? std::optional<double>(rc.options["alpha"].get<double>()) : std::nullopt;
  if (rows == 0 || reps == 0) throw UsageError("--rows and --replicates must be positive");
  if ((prior == "ibp" || prior == "3p-ibp") && !alpha) throw UsageError("--alpha is required for " + prior);
  Rng rng = make_rng(rc.hp.seed);
  prepare_out(rc);

  std::vector<double> k_plus;
  CountMatrix first;
  for (std::size_t r = 0; r < reps; ++r) {
    BinaryFeatureMatrix z;
    std::optional<CountMatrix> counts;
    if (prior == "ibp") {
      z = sample_ibp(*alpha, rows, rng);
    } else if (prior == "3p-ibp") {
      z = sample_3p_ibp(*alpha, rc.hp.c, rc.hp.sigma, rows, rng);
    } else if (prior == "3r-ibp" || prior == "s3r") {
      const RestrictedIbpDraw draw = sample_3r_ibp_full(rc.hp, rows, rng, alpha);
      z = compact_columns(draw.z);
      if (prior == "s3r") {
        // Poisson counts with B ~ Gamma(alpha_B, mean mu_B) over D columns.
        const auto D = rc.options.value("cols", std::size_t{20});
        if (D == 0) throw UsageError("--cols must be positive");
        DenseMatrix<double> b(z.k_plus(), D);
        for (double& v : b.data()) v = gamma_variate(rc.hp.alpha_B, rc.hp.alpha_B / rc.hp.mu_B, rng);
        std::vector<Triplet> t;
        for (std::size_t n = 0; n < rows; ++n) {
          for (std::size_t d = 0; d < D; ++d) {
            double lambda = 0.0;
            for (std::size_t k = 0; k < z.k_plus(); ++k) lambda += z.z(n, k) ? b(k, d) : 0.0;
            const auto x = poisson_variate(lambda, rng);
            if (x > 0) t.push_back({n, d, x});
          }
        }
        counts = CountMatrix(rows, D, std::move(t));
      }
    } else {
      throw UsageError("unknown prior '" + prior + "' (expected ibp, 3p-ibp, 3r-ibp or s3r)");
    }
    k_plus.push_back(static_cast<double>(z.k_plus()));
    if (r == 0) {
      if (counts) {
        first = *counts;
      } else if (z.k_plus() > 0) {
        std::vector<Triplet> t;
        for (std::size_t n = 0; n < rows; ++n) {
          for (std::size_t k = 0; k < z.k_plus(); ++k) {
            if (z.z(n, k)) t.push_back({n, k, 1});
          }
        }
        first = CountMatrix(rows, z.k_plus(), std::move(t));
      }
    }
  }
  const auto [mean, sd] = mean_std(k_plus);
  if (first.n_rows() > 0) save_counts(first, fs::path(rc.out) / "matrix.csv", FileFormat::kDense);
  Json report{{"prior", prior},
              {"rows", rows},
              {"replicates", reps},
              {"seed", rc.hp.seed},
              {"k_plus_mean", mean},
              {"k_plus_se", sd / std::sqrt(static_cast<double>(reps))}};
  if (alpha) report["alpha"] = *alpha;
  if (prior == "ibp") report["k_plus_expected"] = ibp_expected_k_plus(*alpha, rows);
  write_json(rc, "generate_report.json", report);
  std::cout << report.dump() << '\n';
  return 0;
}

int run_fit(const RunConfig& rc, const CountMatrix& data, const ObservationMask& mask,
            const ChainCheckpoint* resume_from) {
  const ChainConfig cc = chain_config(rc);
  const auto halt_at = rc.options.value("halt_at", std::int64_t{0});
  const fs::path cp_path = fs::path(rc.out) / "checkpoint.json";
  auto on_checkpoint = [&](const ChainCheckpoint& cp) { write_json(rc, "checkpoint.json", to_json(cp)); };
  std::optional<ChainRunner> runner;
  if (resume_from != nullptr) {
    runner.emplace(data, mask, cc, *resume_from);
  } else {
    runner.emplace(data, mask, cc);
  }
  runner->run(on_checkpoint, halt_at);
  if (!runner->done()) {
    write_json(rc, "checkpoint.json", to_json(runner->checkpoint()));
    std::cout << Json{{"status", "halted"}, {"iteration", runner->iteration()}, {"checkpoint", cp_path.string()}}.dump()
              << '\n';
    return 0;
  }
  const PosteriorSummary summary = runner->summary();
  const AuxAudit audit = audit_aux(runner->state(), data, mask);
  if (!audit.ok()) throw std::runtime_error("auxiliary count audit failed");
  write_json(rc, "checkpoint.json", to_json(runner->checkpoint()));
  write_json(rc, "summary.json", to_json(summary));
  Json status{{"status", "done"},
              {"iterations", runner->iteration()},
              {"live_features", summary.live_features().size()},
              {"acceptance_rate", summary.acceptance_rate()},
              {"elapsed_seconds", summary.elapsed_seconds}};
  if (!mask.empty()) status["log_perplexity"] = log_perplexity(summary, data, mask);
  std::cout << status.dump() << '\n';
  return 0;
}

int cmd_fit(const RunConfig& rc) {
  const CountMatrix data = load_dataset(rc);
  const ObservationMask mask = mask_for(data, rc, rc.options.value("fold", -1L));
  prepare_out(rc);
  return run_fit(rc, data, mask, nullptr);
}

int cmd_resume(const std::string& out_dir, const std::string& checkpoint_path) {
  if (out_dir.empty()) throw UsageError("--out is required");
  const RunConfig rc = run_config_from_record(read_json(fs::path(out_dir) / "run_config.json"));
  const std::string cp_file = checkpoint_path.empty() ? (fs::path(out_dir) / "checkpoint.json").string() : checkpoint_path;
  const ChainCheckpoint cp = checkpoint_from_json(read_json(cp_file));
  const CountMatrix data = load_dataset(rc);
  const ObservationMask mask = mask_for(data, rc, rc.options.value("fold", -1L));
  RunConfig resumed = rc;
  resumed.options.erase("halt_at");
  return run_fit(resumed, data, mask, &cp);
}

int cmd_eval(const RunConfig& rc) {
  const CountMatrix data = load_dataset(rc);
  const auto top_m = rc.options.value("top", std::size_t{10});
  const auto draws = rc.options.value("draws", std::size_t{200});
  prepare_out(rc);
  EvalReport report;
  report.top_m = top_m;
  std::vector<double> perplexities, coherences;
  std::vector<std::vector<std::vector<std::size_t>>> sets;
  PosteriorSummary first;
  for (std::size_t f = 0; f < rc.folds; ++f) {
    const ObservationMask mask = make_split(data, rc.holdout, rc.hp.seed, f);
    ChainConfig cc = chain_config(rc);
    cc.hp.seed = rc.hp.seed + f;
    const PosteriorSummary s = run_chain(data, mask, cc);
    FoldResult fr;
    fr.fold = f;
    fr.mask_seed = rc.hp.seed;
    fr.chain_seed = cc.hp.seed;
    fr.log_perplexity = log_perplexity(s, data, mask);
    fr.baseline_log_perplexity = row_mean_baseline_log_perplexity(data, mask);
    const auto live = s.live_features();
    fr.live_features = live.size();
    fr.coherence = live.empty() ? 0.0 : umass_coherence(s.b_mean, data, top_m, &live);
    perplexities.push_back(fr.log_perplexity);
    coherences.push_back(fr.coherence);
    report.folds.push_back(fr);
    sets.push_back(top_sets(s, top_m));
    if (f == 0) first = s;
    spdlog::info("fold {}: log perplexity {:.4f} (row-mean baseline {:.4f}), {} live features", f,
                 fr.log_perplexity, fr.baseline_log_perplexity, fr.live_features);
  }
  std::tie(report.log_perplexity_mean, report.log_perplexity_std) = mean_std(perplexities);
  std::tie(report.coherence_mean, report.coherence_std) = mean_std(coherences);
  Rng rng = make_rng(rc.hp.seed, 0x99);
  report.qq_model = qq_row_nonzeros(first, data, draws, rng);
  report.qq_baseline = binomial_baseline_qq(data, draws, rng);
  for (std::size_t f = 1; f < sets.size(); ++f) report.feature_matches.push_back(jaccard_match(sets[0], sets[f]));

  Json folds = Json::array();
  for (const auto& fr : report.folds) {
    folds.push_back({{"fold", fr.fold},
                     {"mask_seed", fr.mask_seed},
                     {"chain_seed", fr.chain_seed},
                     {"log_perplexity", fr.log_perplexity},
                     {"row_mean_baseline_log_perplexity", fr.baseline_log_perplexity},
                     {"coherence", fr.coherence},
                     {"live_features", fr.live_features}});
  }
  Json matches = Json::array();
  for (std::size_t i = 0; i < report.feature_matches.size(); ++i) {
    Json m = match_json(report.feature_matches[i]);
    m["fold_a"] = 0;
    m["fold_b"] = i + 1;
    matches.push_back(m);
  }
  const Json out{{"fold_count", report.folds.size()},
                 {"holdout", rc.holdout},
                 {"top_m", top_m},
                 {"log_perplexity", {{"mean", report.log_perplexity_mean}, {"std", report.log_perplexity_std}}},
                 {"coherence", {{"mean", report.coherence_mean}, {"std", report.coherence_std}}},
                 {"folds", folds},
                 {"qq", {{"fold", 0}, {"draws", draws}, {"model_mean_abs_gap", qq_mean_abs_gap(report.qq_model)},
                         {"binomial_baseline_mean_abs_gap", qq_mean_abs_gap(report.qq_baseline)}}},
                 {"feature_matches", matches}};
  write_json(rc, "eval_report.json", out);
  write_file_atomic(fs::path(rc.out) / "qq.tsv", qq_table(report.qq_model, report.qq_baseline));
  std::cout << Json{{"log_perplexity", out["log_perplexity"]}, {"coherence", out["coherence"]}}.dump() << '\n';
  return 0;
}

int cmd_qq(const RunConfig& rc, const std::string& summary_path) {
  const CountMatrix data = load_dataset(rc);
  const PosteriorSummary s = load_summary(summary_path);
  if (s.n_rows != data.n_rows() || s.n_cols != data.n_cols()) throw UsageError("summary does not match the data shape");
  const auto draws = rc.options.value("draws", std::size_t{200});
  prepare_out(rc);
  Rng rng = make_rng(rc.hp.seed, 0x99);
  const QqPoints model = qq_row_nonzeros(s, data, draws, rng);
  const QqPoints base = binomial_baseline_qq(data, draws, rng);
  write_file_atomic(fs::path(rc.out) / "qq.tsv", qq_table(model, base));
  std::cout << Json{{"model_mean_abs_gap", qq_mean_abs_gap(model)},
                    {"binomial_baseline_mean_abs_gap", qq_mean_abs_gap(base)}}.dump()
            << '\n';
  return 0;
}

int cmd_topics(const RunConfig& rc, const std::string& summary_path) {
  const CountMatrix data = load_dataset(rc);
  const PosteriorSummary s = load_summary(summary_path);
  if (s.n_cols != data.n_cols()) throw UsageError("summary does not match the data shape");
  const auto top_m = rc.options.value("top", std::size_t{10});
  const auto live = s.live_features();
  prepare_out(rc);
  const std::string table = topics_table(top_features(s.b_mean, data.col_labels(), top_m, &live));
  write_file_atomic(fs::path(rc.out) / "topics.tsv", table);
  std::cout << table;
  return 0;
}

int cmd_meta(const RunConfig& rc, const std::string& summary_path) {
  const CountMatrix data = load_dataset(rc);
  const PosteriorSummary s = load_summary(summary_path);
  if (s.n_rows != data.n_rows()) throw UsageError("summary does not match the data shape");
  const CountMatrix layer = binarize_posterior_z(s, data.row_labels());
  prepare_out(rc);
  const ObservationMask none(layer.n_rows(), layer.n_cols());
  const PosteriorSummary meta = run_chain(layer, none, chain_config(rc));
  write_json(rc, "meta_summary.json", to_json(meta));
  save_counts(layer, fs::path(rc.out) / "first_layer.csv", FileFormat::kDense);
  const auto live = meta.live_features();
  const std::string table =
      topics_table(top_features(meta.b_mean, layer.col_labels(), rc.options.value("top", std::size_t{10}), &live));
  write_file_atomic(fs::path(rc.out) / "meta_features.tsv", table);
  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_pattern("[%l] %v");
  CLI::App app{"Sparse restricted IBP Poisson factorization"};
  app.set_version_flag("--version", S3R_VERSION);
  app.require_subcommand(1);

  CommonFlags flags;
  Json options = Json::object();
  std::string summary_path, checkpoint_path, prior;
  double alpha = 0.0;
  std::size_t rows = 0, replicates = 1, cols = 20, draws = 200, top = 10;
  long fold = -1;
  std::int64_t halt_at = 0;
  int checkpoint_every = 0;

  auto* generate = app.add_subcommand("generate", "forward-sample a prior to a matrix file");
  auto* fit = app.add_subcommand("fit", "run one chain");
  auto* eval = app.add_subcommand("eval", "fit every split and report metrics");
  auto* qq = app.add_subcommand("qq", "row sparsity qq table: model and binomial baseline");
  auto* topics = app.add_subcommand("topics", "top-weighted columns per feature");
  auto* meta = app.add_subcommand("meta", "second-layer fit on the binarized features");
  auto* resume = app.add_subcommand("resume", "continue a fit from its checkpoint");

  for (auto* sub : {generate, fit, eval, qq, topics, meta}) flags.attach(sub);
  generate->add_option("--prior", prior, "ibp, 3p-ibp, 3r-ibp or s3r")->required();
  generate->add_option("--alpha", alpha, "mass parameter");
  generate->add_option("--rows", rows, "rows to draw")->required();
  generate->add_option("--replicates", replicates, "independent draws summarized in the report");
  generate->add_option("--cols", cols, "columns of the count matrix (s3r only)");
  fit->add_option("--fold", fold, "hold out split i; -1 fits every entry");
  fit->add_option("--checkpoint-every", checkpoint_every, "iterations between checkpoints");
  fit->add_option("--halt-at", halt_at, "stop after this many iterations and write a checkpoint");
  for (auto* sub : {qq, topics, meta}) sub->add_option("--summary", summary_path, "summary.json of a fit");
  for (auto* sub : {eval, qq}) sub->add_option("--draws", draws, "replicate matrices for the qq table");
  for (auto* sub : {eval, topics, meta}) sub->add_option("--top", top, "columns reported per feature");
  resume->add_option("--out", flags.out, "output directory of the halted fit")->required();
  resume->add_option("--checkpoint", checkpoint_path, "checkpoint file (default <out>/checkpoint.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*resume) return cmd_resume(flags.out, checkpoint_path);
    auto* sub = app.get_subcommands().front();
    auto given = [&](const char* name) { return sub->get_option_no_throw(name) != nullptr && sub->count(name) > 0; };
    if (*generate) {
      options["prior"] = prior;
      options["rows"] = rows;
      options["replicates"] = replicates;
      options["cols"] = cols;
      if (given("--alpha")) options["alpha"] = alpha;
    }
    if (given("--fold")) options["fold"] = fold;
    if (given("--checkpoint-every")) options["checkpoint_every"] = checkpoint_every;
    if (given("--halt-at")) options["halt_at"] = halt_at;
    if (given("--draws")) options["draws"] = draws;
    if (given("--top")) options["top"] = top;
    options["command"] = sub->get_name();
    const RunConfig rc = flags.resolve(options);
    if (*generate) return cmd_generate(rc);
    if (*fit) return cmd_fit(rc);
    if (*eval) return cmd_eval(rc);
    if (*qq) return cmd_qq(rc, summary_path);
    if (*topics) return cmd_topics(rc, summary_path);
    if (*meta) return cmd_meta(rc, summary_path);
  } catch (const UsageError& e) {
    print_error("usage", e.what());
    return 2;
  } catch (const ParseError& e) {
    print_error("parse", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return 1;
  }
  return 1;
}
