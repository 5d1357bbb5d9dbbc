#include "csc/cli.hpp"

#include "csc/baseline.hpp"
#include "csc/dataio.hpp"
#include "csc/dictlearn.hpp"
#include "csc/evalkit.hpp"
#include "csc/simulate.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ostream>
#include <sstream>

namespace csc {

using nlohmann::json;

namespace {

void configure_logging() {
  static bool done = false;
  if (!done) {
    auto logger = spdlog::get("csc");
    if (!logger) logger = spdlog::stderr_color_mt("csc");
    spdlog::set_default_logger(logger);
    done = true;
  }
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("CSC_LOG")) {
    const std::string v = env;
    if (v == "error") level = spdlog::level::err;
    else if (v == "warn") level = spdlog::level::warn;
    else if (v == "info") level = spdlog::level::info;
    else if (v == "debug") level = spdlog::level::debug;
  }
  spdlog::set_level(level);
}

std::string exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// "0,2,5-9" -> {0, 2, 5, 6, 7, 8, 9}
std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  auto number = [](const std::string& s) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("bad group index '" + s + "'");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(number(item));
    } else {
      const std::size_t lo = number(item.substr(0, dash));
      const std::size_t hi = number(item.substr(dash + 1));
      if (hi < lo) throw ConfigError("bad group range '" + item + "'");
      for (std::size_t g = lo; g <= hi; ++g) out.push_back(g);
    }
  }
  if (out.empty()) throw ConfigError("empty group subset");
  return out;
}

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool needs_out = true) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (1 = serial kernels)")->capture_default_str()->check(CLI::PositiveNumber);
  auto* o = cmd->add_option("--out", c.out, "Output directory");
  if (needs_out) o->required();
}

class Recorder {
 public:
  Recorder(int argc, const char* const* argv) : start_(std::chrono::steady_clock::now()) {
    for (int i = 0; i < argc; ++i) record_.command_line.emplace_back(argv[i]);
    record_.library_version = kLibraryVersion;
  }
  RunRecord& record() { return record_; }
  void write(const fs::path& dir) {
    record_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_run_record(record_, dir);
  }

 private:
  std::chrono::steady_clock::time_point start_;
  RunRecord record_;
};

struct FitCscOptions {
  std::string data;
  std::size_t K = 20;
  double tau = 1.0;
  std::optional<double> lambda;
  std::vector<double> grid;
  int folds = 5;
  int max_alternations = 200;
  double rtol = 1e-6;
  int inner = 50;
  double enc_tol = 1e-8;
  int max_sweeps = 1000;
  bool no_warm_start = false;
  bool unordered = false;
  std::string groups_subset;
};

void add_csc_options(CLI::App* cmd, FitCscOptions& o, bool with_lambda) {
  cmd->add_option("--k", o.K, "Dictionary size")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--tau", o.tau, "Nuclear-norm budget per codeword")->capture_default_str();
  if (with_lambda) cmd->add_option("--lambda", o.lambda, "l1 penalty (cross-validated when omitted)");
  cmd->add_option("--grid", o.grid, "Lambda grid for cross-validation");
  cmd->add_option("--folds", o.folds, "Cross-validation folds")->capture_default_str();
  cmd->add_option("--max-alt", o.max_alternations, "Maximum alternations")->capture_default_str();
  cmd->add_option("--rtol", o.rtol, "Relative objective change for convergence")->capture_default_str();
  cmd->add_option("--inner", o.inner, "Accelerated gradient iterations per dictionary step")->capture_default_str();
  cmd->add_option("--enc-tol", o.enc_tol, "Lasso tolerance")->capture_default_str();
  cmd->add_option("--max-sweeps", o.max_sweeps, "Lasso sweep budget")->capture_default_str();
  cmd->add_flag("--no-warm-start", o.no_warm_start, "Cold-start every encoding step");
  cmd->add_flag("--unordered-reduction", o.unordered, "Per-thread gradient sums (not bitwise reproducible)");
}

CscConfig make_config(const FitCscOptions& o, const Common& c) {
  CscConfig config;
  config.K = o.K;
  config.tau = o.tau;
  config.lambda = o.lambda.value_or(0.0);
  config.max_alternations = o.max_alternations;
  config.objective_rtol = o.rtol;
  config.max_inner_iterations = o.inner;
  config.encoder_tol = o.enc_tol;
  config.encoder_max_sweeps = o.max_sweeps;
  config.warm_start = !o.no_warm_start;
  config.rng_seed = c.seed;
  config.exec.threads = c.threads;
  config.exec.ordered_reduction = !o.unordered;
  return config;
}

std::string format_cv_curve(const LambdaSelection& s) {
  std::string out = "lambda,cv_error\n";
  for (std::size_t i = 0; i < s.grid.size(); ++i) out += exact(s.grid[i]) + "," + exact(s.cv_error[i]) + "\n";
  return out;
}

LambdaSelection run_lambda_cv(const GroupedDataset& data, const CscConfig& config, const FitCscOptions& o,
                              const Common& c) {
  const std::vector<double> grid = o.grid.empty() ? default_lambda_grid(config.K, data.n()) : o.grid;
  CscConfig inner = config;
  inner.exec = Exec::serial();
  return select_lambda(data, inner, grid, o.folds, c.seed, c.threads);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const SimParams& params, const Common& c, Recorder& rec, std::ostream& out) {
  SimParams p = params;
  p.rng_seed = c.seed;
  const SimulatedData sim = gen_dataset(p);
  const json provenance{{"source", "simulation"},
                        {"scenario", to_string(p.scenario)},
                        {"p", p.p},
                        {"q", p.response_dim()},
                        {"n_train", p.n_train},
                        {"n_test", p.n_test},
                        {"G", p.G},
                        {"true_dictionary_size", p.true_dictionary_size},
                        {"true_sparsity", p.true_sparsity},
                        {"true_rank", p.true_rank},
                        {"noise_sigma", p.noise_sigma},
                        {"rng_seed", p.rng_seed}};
  const fs::path manifest = save_dataset(sim.train, c.out, &sim.truth, &sim.test, provenance);
  rec.record().config = provenance;
  rec.record().seed = c.seed;
  rec.record().outputs = {manifest.string()};
  rec.write(c.out);
  out << "manifest: " << manifest.string() << "\n";
  return kExitOk;
}

int cmd_fit_csc(const FitCscOptions& o, const Common& c, Recorder& rec, std::ostream& out) {
  const GroupedDataset full = load_dataset(o.data);
  const GroupedDataset learn = o.groups_subset.empty() ? full : full.subset(parse_index_list(o.groups_subset));
  CscConfig config = make_config(o, c);
  config.validate();
  const fs::path dir = c.out;
  fs::create_directories(dir);

  json record_config;
  if (!o.lambda) {
    const LambdaSelection sel = run_lambda_cv(learn, config, o, c);
    config.lambda = sel.best_lambda;
    write_text(format_cv_curve(sel), dir / "cv_curve.csv");
    record_config["cv_lambda"] = {{"grid", sel.grid}, {"cv_error", sel.cv_error}, {"folds", o.folds}};
    out << "selected lambda: " << exact(config.lambda) << "\n";
  }

  CscFitResult fit = csc_fit(learn, config);
  CscModel model = fit.model;
  if (!o.groups_subset.empty()) {
    const EncoderOptions enc{config.encoder_tol, config.encoder_max_sweeps, false};
    model.coefficients = encode_all(model.dictionary, full, config.lambda, enc, nullptr, config.exec).coefficients;
  }
  save_model(model, fit.diagnostics, dir);

  record_config["csc"] = config_to_json(config);
  record_config["threads"] = c.threads;
  if (!o.groups_subset.empty()) record_config["groups_subset"] = o.groups_subset;
  rec.record().config = record_config;
  rec.record().seed = c.seed;
  rec.record().outputs = {(dir / "model.json").string(), (dir / "diagnostics.csv").string()};
  rec.write(dir);

  const FitDiagnostics& d = fit.diagnostics;
  out << "alternations: " << d.alternations() << (d.converged ? " (converged)" : " (budget reached)") << "\n"
      << "final objective: " << exact(d.objective.back()) << "\n"
      << "mean l0: first " << d.mean_l0(0) << ", final " << d.mean_l0(d.alternations() - 1) << "\n"
      << "sparsity warning: " << (d.sparsity_warning ? "YES" : "no") << "\n";
  return kExitOk;
}

struct FitRrrOptions {
  std::string data;
  double radius = 0.0;
  std::vector<double> multipliers;
  int folds = 5;
  int max_iterations = 2000;
  double rtol = 1e-8;
};

std::vector<double> choose_radii(const GroupedDataset& data, const RrrConfig& config, const FitRrrOptions& o,
                                 const Common& c, json& record) {
  if (o.radius > 0.0) return std::vector<double>(data.size(), o.radius);
  if (data.n() >= data.p()) {
    record["radius_rule"] = "least_squares_nuclear_norm";
    return default_radii(data);
  }
  const auto mult = o.multipliers.empty() ? default_radius_multipliers() : o.multipliers;
  const RadiusSelection sel = select_rrr_radius(data, config, mult, o.folds, c.seed, c.threads);
  record["radius_rule"] = "cross_validation";
  record["multipliers"] = mult;
  return sel.radii;
}

int cmd_fit_rrr(const FitRrrOptions& o, const Common& c, Recorder& rec, std::ostream& out) {
  const GroupedDataset data = load_dataset(o.data);
  RrrConfig config;
  config.max_iterations = o.max_iterations;
  config.rtol = o.rtol;
  config.rng_seed = c.seed;
  json record{{"max_iterations", o.max_iterations}, {"rtol", o.rtol}, {"threads", c.threads}};
  const std::vector<double> radii = choose_radii(data, config, o, c, record);
  const RrrFitAllResult fit = rrr_fit_all(data, radii, config, Exec{c.threads, true});
  save_rrr_model(fit.estimates, radii, record, c.out);
  rec.record().config = record;
  rec.record().seed = c.seed;
  rec.record().outputs = {(fs::path(c.out) / "model.json").string()};
  rec.write(c.out);
  std::size_t converged = 0;
  for (const RrrResult& r : fit.groups) converged += r.converged ? 1 : 0;
  out << "groups: " << fit.groups.size() << ", converged: " << converged << "\n";
  return kExitOk;
}

struct EncodeOptions {
  std::string model;
  std::string data;
  std::optional<double> lambda;
  double enc_tol = 1e-8;
  int max_sweeps = 1000;
};

int cmd_encode(const EncodeOptions& o, const Common& c, Recorder& rec, std::ostream& out) {
  const LoadedModel loaded = load_model(o.model);
  const GroupedDataset data = load_dataset(o.data);
  CscModel model = loaded.model;
  model.config.lambda = o.lambda.value_or(model.config.lambda);
  model.config.encoder_tol = o.enc_tol;
  model.config.encoder_max_sweeps = o.max_sweeps;
  const EncoderOptions enc{o.enc_tol, o.max_sweeps, false};
  const EncodeAllResult encoded =
      encode_all(model.dictionary, data, model.config.lambda, enc, nullptr, Exec{c.threads, true});
  for (const auto& w : encoded.warnings) spdlog::warn("{}", w);
  model.coefficients = encoded.coefficients;

  FitDiagnostics diag;
  diag.objective.push_back(objective(model.dictionary, model.coefficients, data, model.config.lambda));
  diag.stationarity.push_back(0.0);
  std::vector<int> l0;
  std::vector<double> l1;
  for (const Vector& a : model.coefficients.alphas) {
    l0.push_back(static_cast<int>((a.array() != 0.0).count()));
    l1.push_back(a.lpNorm<1>());
  }
  diag.l0.push_back(l0);
  diag.l1.push_back(l1);
  diag.rank.push_back(loaded.diagnostics.rank.empty() ? std::vector<int>{} : loaded.diagnostics.rank.back());
  diag.converged = encoded.warnings.empty();
  save_model(model, diag, c.out);

  rec.record().config = {{"dictionary_from", o.model}, {"csc", config_to_json(model.config)}};
  rec.record().seed = c.seed;
  rec.record().outputs = {(fs::path(c.out) / "model.json").string()};
  rec.write(c.out);
  out << "encoded groups: " << data.size() << ", objective: " << exact(diag.objective.back()) << "\n";
  return kExitOk;
}

struct EvaluateOptions {
  std::string model;
  std::string data;
  std::string test;
  bool truth = false;
};

int cmd_evaluate(const EvaluateOptions& o, const Common& c, std::ostream& out) {
  const LoadedDataset loaded = load_dataset_full(o.data);
  const std::vector<Matrix> estimates = load_estimates(o.model);
  GroupedDataset test;
  std::string test_source;
  if (!o.test.empty()) {
    test = load_dataset(o.test);
    test_source = o.test;
  } else if (loaded.has_test()) {
    test = load_dataset(loaded.test_manifest_path());
    test_source = loaded.test_manifest_path().string();
  } else {
    test = loaded.data;
    test_source = o.data + " (training data)";
  }
  const std::vector<Matrix>* truth = nullptr;
  if (o.truth) {
    if (!loaded.truth) throw ValidationError(o.data + ": manifest has no ground truth");
    truth = &loaded.truth->B_star;
  }
  const EvalReport r = evaluate(estimates, test, truth);
  out << "metric,value\n";
  if (r.has_estimation_error) out << "estimation_error," << exact(r.estimation_error) << "\n";
  out << "prediction_error," << exact(r.prediction_error) << "\n";
  for (std::size_t g = 0; g < r.per_group_prediction_error.size(); ++g)
    out << "prediction_error[" << g << "]," << exact(r.per_group_prediction_error[g]) << "\n";
  if (!c.out.empty()) {
    json j{{"prediction_error", r.prediction_error},
           {"per_group_prediction_error", r.per_group_prediction_error},
           {"test_data", test_source},
           {"model", o.model}};
    if (r.has_estimation_error) j["estimation_error"] = r.estimation_error;
    write_text(j.dump(2) + "\n", fs::path(c.out) / "evaluation.json");
  }
  return kExitOk;
}

int cmd_cv_lambda(const FitCscOptions& o, const Common& c, Recorder& rec, std::ostream& out) {
  const GroupedDataset data = load_dataset(o.data);
  const CscConfig config = make_config(o, c);
  config.validate();
  const LambdaSelection sel = run_lambda_cv(data, config, o, c);
  fs::create_directories(c.out);
  write_text(format_cv_curve(sel), fs::path(c.out) / "cv_curve.csv");
  rec.record().config = {{"csc", config_to_json(config)}, {"folds", o.folds}, {"grid", sel.grid}};
  rec.record().seed = c.seed;
  rec.record().outputs = {(fs::path(c.out) / "cv_curve.csv").string()};
  rec.write(c.out);
  out << format_cv_curve(sel) << "best lambda: " << exact(sel.best_lambda) << "\n";
  return kExitOk;
}

struct HoldoutOptions {
  FitCscOptions csc;
  FitRrrOptions rrr;
  std::string method = "both";
  std::size_t trials = 60;
  std::string metric = "euclidean";
};

int cmd_holdout2(const HoldoutOptions& o, const Common& c, Recorder& rec, std::ostream& out) {
  const GroupedDataset data = load_dataset(o.csc.data);
  const Metric metric = parse_metric(o.metric);
  const bool run_csc = o.method == "csc" || o.method == "both";
  const bool run_rrr = o.method == "rrr" || o.method == "both";
  if (!run_csc && !run_rrr) throw ConfigError("--method must be csc, rrr or both");
  json record{{"method", o.method}, {"trials", o.trials}, {"metric", to_string(metric)}};

  std::vector<std::pair<std::string, HoldoutResult>> results;
  if (run_csc) {
    CscConfig config = make_config(o.csc, c);
    config.validate();
    if (!o.csc.lambda) config.lambda = run_lambda_cv(data, config, o.csc, c).best_lambda;
    record["csc"] = config_to_json(config);
    const FitProcedure fit = [config](const GroupedDataset& train) {
      return csc_fit(train, config).model.regression_matrices();
    };
    results.emplace_back("csc", hold_two_out_cv(data, fit, o.trials, metric, c.seed));
  }
  if (run_rrr) {
    RrrConfig config;
    config.max_iterations = o.rrr.max_iterations;
    config.rtol = o.rrr.rtol;
    json rrr_record;
    std::optional<std::vector<double>> fixed;
    if (o.rrr.radius > 0.0 || data.n() - 2 < data.p()) fixed = choose_radii(data, config, o.rrr, c, rrr_record);
    record["rrr"] = rrr_record;
    const Exec exec{c.threads, true};
    const FitProcedure fit = [config, fixed, exec](const GroupedDataset& train) {
      return fixed ? rrr_fit_all(train, *fixed, config, exec).estimates : rrr_fit_all(train, config, exec).estimates;
    };
    results.emplace_back("rrr", hold_two_out_cv(data, fit, o.trials, metric, c.seed));
  }

  fs::create_directories(c.out);
  std::string summary = "group,method,acc_2v2,acc_1v2,mean_squared_error,n_trials,failed_trials\n";
  for (const auto& [name, res] : results)
    for (std::size_t g = 0; g < res.per_group.size(); ++g) {
      const PairEvalReport& r = res.per_group[g];
      summary += std::to_string(g) + "," + name + "," + exact(r.acc_2v2) + "," + exact(r.acc_1v2) + "," +
                 exact(r.mean_squared_error) + "," + std::to_string(r.n_trials) + "," +
                 std::to_string(res.failed_trials) + "\n";
    }
  std::string trials = "trial,method,first,second,group,correct_2v2,correct_1v2,squared_error,failed\n";
  for (const auto& [name, res] : results)
    for (std::size_t t = 0; t < res.trials.size(); ++t) {
      const HoldoutTrial& tr = res.trials[t];
      if (tr.failed) {
        trials += std::to_string(t) + "," + name + "," + std::to_string(tr.first) + "," + std::to_string(tr.second) +
                  ",,,,,1\n";
        continue;
      }
      for (std::size_t g = 0; g < tr.correct_2v2.size(); ++g)
        trials += std::to_string(t) + "," + name + "," + std::to_string(tr.first) + "," + std::to_string(tr.second) +
                  "," + std::to_string(g) + "," + (tr.correct_2v2[g] ? "1" : "0") + "," +
                  (tr.correct_1v2[g] ? "1" : "0") + "," + exact(tr.squared_error[g]) + ",0\n";
    }
  write_text(summary, fs::path(c.out) / "holdout_summary.csv");
  write_text(trials, fs::path(c.out) / "holdout_trials.csv");
  std::vector<std::string> outputs{(fs::path(c.out) / "holdout_summary.csv").string(),
                                   (fs::path(c.out) / "holdout_trials.csv").string()};

  out << summary;
  if (results.size() == 2) {
    // Sign test per group and statistic, csc against rrr over trials both completed.
    const HoldoutResult& a = results[0].second;
    const HoldoutResult& b = results[1].second;
    std::string conf = "group,statistic,csc_better,rrr_better,ties,p_value\n";
    for (std::size_t g = 0; g < data.size(); ++g) {
      std::vector<double> a2, b2, a1, b1, ae, be;
      for (std::size_t t = 0; t < a.trials.size(); ++t) {
        if (a.trials[t].failed || b.trials[t].failed) continue;
        a2.push_back(a.trials[t].correct_2v2[g]);
        b2.push_back(b.trials[t].correct_2v2[g]);
        a1.push_back(a.trials[t].correct_1v2[g]);
        b1.push_back(b.trials[t].correct_1v2[g]);
        ae.push_back(a.trials[t].squared_error[g]);
        be.push_back(b.trials[t].squared_error[g]);
      }
      auto line = [&](const char* stat, const SignTest& s) {
        conf += std::to_string(g) + "," + stat + "," + std::to_string(s.wins) + "," + std::to_string(s.losses) + "," +
                std::to_string(s.ties) + "," + exact(s.p_value) + "\n";
      };
      line("acc_2v2", paired_sign_test(a2, b2, true));
      line("acc_1v2", paired_sign_test(a1, b1, true));
      line("squared_error", paired_sign_test(ae, be, false));
    }
    write_text(conf, fs::path(c.out) / "holdout_sign_test.csv");
    outputs.push_back((fs::path(c.out) / "holdout_sign_test.csv").string());
    out << conf;
  }
  rec.record().config = record;
  rec.record().seed = c.seed;
  rec.record().outputs = outputs;
  rec.write(c.out);
  return kExitOk;
}

int cmd_diagnose(const std::string& model_dir, const Common& c, std::ostream& out) {
  const LoadedModel loaded = load_model(model_dir);
  const std::string report = diagnostics_report(loaded.diagnostics);
  out << report;
  if (!c.out.empty()) write_text(report, fs::path(c.out) / "diagnostics_report.txt");
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  configure_logging();
  CLI::App app{"Conditional sparse coding: shared low-rank dictionaries for grouped multivariate regression", "csc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kLibraryVersion));

  // simulate
  SimParams sim;
  std::string scenario = "structured";
  Common sim_common;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic grouped dataset with known ground truth");
  simulate->add_option("--scenario", scenario, "structured | unstructured | structured_same_design")
      ->capture_default_str()
      ->check(CLI::IsMember({"structured", "unstructured", "structured_same_design"}));
  simulate->add_option("--p", sim.p, "Covariate dimension")->capture_default_str();
  simulate->add_option("--q", sim.q, "Response dimension (default: p)");
  simulate->add_option("--g", sim.G, "Number of groups")->capture_default_str();
  simulate->add_option("--n", sim.n_train, "Training samples per group")->capture_default_str();
  simulate->add_option("--n-test", sim.n_test, "Test samples per group")->capture_default_str();
  simulate->add_option("--dict-size", sim.true_dictionary_size, "True dictionary size")->capture_default_str();
  simulate->add_option("--sparsity", sim.true_sparsity, "True coefficient sparsity")->capture_default_str();
  simulate->add_option("--rank", sim.true_rank, "True rank (unstructured)")->capture_default_str();
  simulate->add_option("--sigma", sim.noise_sigma, "Noise standard deviation")->capture_default_str();
  add_common(simulate, sim_common);

  // fit csc / fit rrr
  auto* fit = app.add_subcommand("fit", "Fit a model");
  fit->require_subcommand(1);
  FitCscOptions csc_opts;
  Common csc_common;
  auto* fit_csc = fit->add_subcommand("csc", "Learn a shared dictionary and sparse group coefficients");
  fit_csc->add_option("--data", csc_opts.data, "Dataset manifest")->required();
  add_csc_options(fit_csc, csc_opts, true);
  fit_csc->add_option("--groups-subset", csc_opts.groups_subset,
                      "Learn the dictionary on these groups only (e.g. 0-9,12); all groups are then encoded");
  add_common(fit_csc, csc_common);

  FitRrrOptions rrr_opts;
  Common rrr_common;
  auto* fit_rrr = fit->add_subcommand("rrr", "Separate nuclear-norm constrained regressions per group");
  fit_rrr->add_option("--data", rrr_opts.data, "Dataset manifest")->required();
  fit_rrr->add_option("--radius", rrr_opts.radius, "Nuclear-ball radius for every group (default: per-group rule)");
  fit_rrr->add_option("--multipliers", rrr_opts.multipliers, "Radius multipliers for cross-validation");
  fit_rrr->add_option("--folds", rrr_opts.folds, "Cross-validation folds")->capture_default_str();
  fit_rrr->add_option("--max-iter", rrr_opts.max_iterations, "Iteration budget")->capture_default_str();
  fit_rrr->add_option("--rtol", rrr_opts.rtol, "Stationarity tolerance")->capture_default_str();
  add_common(fit_rrr, rrr_common);

  // encode
  EncodeOptions enc_opts;
  Common enc_common;
  auto* encode = app.add_subcommand("encode", "Encode data against a previously learned dictionary");
  encode->add_option("--model", enc_opts.model, "CSC model directory")->required();
  encode->add_option("--data", enc_opts.data, "Dataset manifest")->required();
  encode->add_option("--lambda", enc_opts.lambda, "l1 penalty (default: the model's)");
  encode->add_option("--enc-tol", enc_opts.enc_tol, "Lasso tolerance")->capture_default_str();
  encode->add_option("--max-sweeps", enc_opts.max_sweeps, "Lasso sweep budget")->capture_default_str();
  add_common(encode, enc_common);

  // evaluate
  EvaluateOptions eval_opts;
  Common eval_common;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Estimation and prediction error of a fitted model");
  evaluate_cmd->add_option("--model", eval_opts.model, "Model directory")->required();
  evaluate_cmd->add_option("--data", eval_opts.data, "Dataset manifest")->required();
  evaluate_cmd->add_option("--test", eval_opts.test, "Test manifest (default: the manifest's test set)");
  evaluate_cmd->add_flag("--truth", eval_opts.truth, "Report estimation error against the manifest's ground truth");
  add_common(evaluate_cmd, eval_common, false);

  // cv-lambda
  FitCscOptions cv_opts;
  Common cv_common;
  auto* cv = app.add_subcommand("cv-lambda", "Cross-validate the l1 penalty");
  cv->add_option("--data", cv_opts.data, "Dataset manifest")->required();
  add_csc_options(cv, cv_opts, false);
  add_common(cv, cv_common);

  // holdout2
  HoldoutOptions ho;
  Common ho_common;
  auto* holdout = app.add_subcommand("holdout2", "Hold-two-out evaluation with 2v2 / 1v2 classification");
  holdout->add_option("--data", ho.csc.data, "Dataset manifest")->required();
  holdout->add_option("--method", ho.method, "csc | rrr | both")
      ->capture_default_str()
      ->check(CLI::IsMember({"csc", "rrr", "both"}));
  holdout->add_option("--trials", ho.trials, "Number of held-out pairs")->capture_default_str()->check(CLI::PositiveNumber);
  holdout->add_option("--metric", ho.metric, "euclidean | cosine_distance")
      ->capture_default_str()
      ->check(CLI::IsMember({"euclidean", "cosine_distance", "cosine"}));
  add_csc_options(holdout, ho.csc, true);
  holdout->add_option("--radius", ho.rrr.radius, "Nuclear-ball radius for the separate regressions");
  holdout->add_option("--rrr-max-iter", ho.rrr.max_iterations, "Separate-regression iteration budget")->capture_default_str();
  add_common(holdout, ho_common);

  // diagnose
  std::string diag_model;
  Common diag_common;
  auto* diagnose = app.add_subcommand("diagnose", "Per-alternation diagnostics of a CSC fit");
  diagnose->add_option("--model", diag_model, "CSC model directory")->required();
  add_common(diagnose, diag_common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Recorder rec(argc, argv);
  try {
    if (*simulate) {
      sim.scenario = parse_scenario(scenario);
      return cmd_simulate(sim, sim_common, rec, out);
    }
    if (*fit_csc) return cmd_fit_csc(csc_opts, csc_common, rec, out);
    if (*fit_rrr) return cmd_fit_rrr(rrr_opts, rrr_common, rec, out);
    if (*encode) return cmd_encode(enc_opts, enc_common, rec, out);
    if (*evaluate_cmd) return cmd_evaluate(eval_opts, eval_common, out);
    if (*cv) return cmd_cv_lambda(cv_opts, cv_common, rec, out);
    if (*holdout) {
      ho.rrr.folds = ho.csc.folds;
      return cmd_holdout2(ho, ho_common, rec, out);
    }
    if (*diagnose) return cmd_diagnose(diag_model, diag_common, out);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace csc
