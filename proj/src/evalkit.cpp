#include "csc/evalkit.hpp"

#include "csc/baseline.hpp"
#include "csc/rng.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <sstream>

namespace csc {

namespace {

void check_estimates(const std::vector<Matrix>& B_hat, const GroupedDataset& data) {
  if (B_hat.size() != data.size())
    throw DimensionError(std::to_string(B_hat.size()) + " estimates for " + std::to_string(data.size()) + " groups");
  for (std::size_t g = 0; g < B_hat.size(); ++g)
    if (B_hat[g].rows() != data.q() || B_hat[g].cols() != data.p())
      throw DimensionError("group " + std::to_string(g) + ": estimate is " + std::to_string(B_hat[g].rows()) + "x" +
                           std::to_string(B_hat[g].cols()) + ", data needs " + std::to_string(data.q()) + "x" +
                           std::to_string(data.p()));
}

// Columns of [0, n) not in `held`.
std::vector<Eigen::Index> complement(Eigen::Index n, const std::vector<Eigen::Index>& held) {
  std::vector<bool> out(static_cast<std::size_t>(n), false);
  for (Eigen::Index c : held) out[static_cast<std::size_t>(c)] = true;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < n; ++c)
    if (!out[static_cast<std::size_t>(c)]) keep.push_back(c);
  return keep;
}

double log_binomial_pmf(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0) - static_cast<double>(n) * std::log(2.0);
}

}  // namespace

double estimation_error(const std::vector<Matrix>& B_hat, const std::vector<Matrix>& B_star) {
  if (B_hat.size() != B_star.size())
    throw DimensionError("estimation_error: " + std::to_string(B_hat.size()) + " estimates vs " +
                         std::to_string(B_star.size()) + " true matrices");
  if (B_hat.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t g = 0; g < B_hat.size(); ++g) {
    if (B_hat[g].rows() != B_star[g].rows() || B_hat[g].cols() != B_star[g].cols())
      throw DimensionError("estimation_error: group " + std::to_string(g) + " shape mismatch");
    total += (B_star[g] - B_hat[g]).norm();
  }
  return total / static_cast<double>(B_hat.size());
}

std::vector<double> per_group_prediction_error(const std::vector<Matrix>& B_hat, const GroupedDataset& test) {
  check_estimates(B_hat, test);
  std::vector<double> out;
  out.reserve(test.size());
  for (std::size_t g = 0; g < test.size(); ++g)
    out.push_back((test[g].Y - B_hat[g] * test[g].X).squaredNorm() / static_cast<double>(test[g].X.cols()));
  return out;
}

double prediction_error(const std::vector<Matrix>& B_hat, const GroupedDataset& test) {
  const std::vector<double> per_group = per_group_prediction_error(B_hat, test);
  if (per_group.empty()) return 0.0;
  double total = 0.0;
  for (double e : per_group) total += e;
  return total / static_cast<double>(per_group.size());
}

EvalReport evaluate(const std::vector<Matrix>& B_hat, const GroupedDataset& test, const std::vector<Matrix>* B_star) {
  EvalReport r;
  r.per_group_prediction_error = per_group_prediction_error(B_hat, test);
  r.prediction_error = prediction_error(B_hat, test);
  if (B_star != nullptr) {
    r.estimation_error = estimation_error(B_hat, *B_star);
    r.has_estimation_error = true;
  }
  return r;
}

std::string to_string(Metric m) { return m == Metric::euclidean ? "euclidean" : "cosine_distance"; }

Metric parse_metric(const std::string& name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "cosine_distance" || name == "cosine") return Metric::cosine_distance;
  throw ConfigError("unknown metric '" + name + "'");
}

double distance(const Vector& a, const Vector& b, Metric metric) {
  if (a.size() != b.size()) throw DimensionError("distance: vectors differ in length");
  if (metric == Metric::euclidean) return (a - b).norm();
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw UndefinedMetricError("cosine distance is undefined for a zero vector");
  return 1.0 - a.dot(b) / (na * nb);
}

PairOutcome classify_pair(const Vector& y1, const Vector& y2, const Vector& yhat1, const Vector& yhat2,
                          Metric metric) {
  const double d11 = distance(y1, yhat1, metric);
  const double d22 = distance(y2, yhat2, metric);
  const double d12 = distance(y1, yhat2, metric);
  const double d21 = distance(y2, yhat1, metric);
  PairOutcome out;
  out.correct_2v2 = d11 + d22 < d12 + d21;
  out.correct_1v2 = d11 < d12 && d22 < d21;
  return out;
}

HoldoutResult hold_two_out_cv(const GroupedDataset& dataset, const FitProcedure& fit, std::size_t n_trials,
                              Metric metric, std::uint64_t rng_seed) {
  const Eigen::Index n = dataset.n();
  if (n < 3) throw ConfigError("hold_two_out_cv needs at least 3 samples per group");
  if (n_trials < 1) throw ConfigError("hold_two_out_cv needs at least one trial");

  Rng rng(rng_seed);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  const auto distinct = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  if (n_trials <= distinct) {
    pairs.reserve(distinct);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    rng.shuffle(pairs);
    pairs.resize(n_trials);
  } else {
    for (std::size_t t = 0; t < n_trials; ++t) {
      const auto both = rng.sample_without_replacement(static_cast<std::size_t>(n), 2);
      const auto a = static_cast<Eigen::Index>(std::min(both[0], both[1]));
      const auto b = static_cast<Eigen::Index>(std::max(both[0], both[1]));
      pairs.emplace_back(a, b);
    }
  }

  HoldoutResult out;
  const std::size_t G = dataset.size();
  for (const auto& [i, j] : pairs) {
    HoldoutTrial trial;
    trial.first = i;
    trial.second = j;
    try {
      const GroupedDataset train = dataset.columns(complement(n, {i, j}));
      const std::vector<Matrix> B = fit(train);
      check_estimates(B, dataset);
      for (std::size_t g = 0; g < G; ++g) {
        const Vector y1 = dataset[g].Y.col(i);
        const Vector y2 = dataset[g].Y.col(j);
        const Vector yhat1 = B[g] * dataset[g].X.col(i);
        const Vector yhat2 = B[g] * dataset[g].X.col(j);
        const PairOutcome o = classify_pair(y1, y2, yhat1, yhat2, metric);
        trial.correct_2v2.push_back(o.correct_2v2);
        trial.correct_1v2.push_back(o.correct_1v2);
        trial.squared_error.push_back(0.5 * ((y1 - yhat1).squaredNorm() + (y2 - yhat2).squaredNorm()));
      }
    } catch (const Error& e) {
      trial.failed = true;
      trial.error = e.what();
      trial.correct_2v2.clear();
      trial.correct_1v2.clear();
      trial.squared_error.clear();
      ++out.failed_trials;
    }
    out.trials.push_back(std::move(trial));
  }

  out.per_group.assign(G, PairEvalReport{});
  for (const HoldoutTrial& t : out.trials) {
    if (t.failed) continue;
    for (std::size_t g = 0; g < G; ++g) {
      PairEvalReport& r = out.per_group[g];
      r.acc_2v2 += t.correct_2v2[g] ? 1.0 : 0.0;
      r.acc_1v2 += t.correct_1v2[g] ? 1.0 : 0.0;
      r.mean_squared_error += t.squared_error[g];
      ++r.n_trials;
    }
  }
  for (PairEvalReport& r : out.per_group) {
    if (r.n_trials == 0) continue;
    const auto count = static_cast<double>(r.n_trials);
    r.acc_2v2 /= count;
    r.acc_1v2 /= count;
    r.mean_squared_error /= count;
  }
  return out;
}

SignTest paired_sign_test(const std::vector<double>& first, const std::vector<double>& second, bool higher_is_better) {
  if (first.size() != second.size()) throw DimensionError("paired_sign_test: samples differ in length");
  SignTest s;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const double diff = higher_is_better ? first[i] - second[i] : second[i] - first[i];
    if (diff > 0.0) {
      ++s.wins;
    } else if (diff < 0.0) {
      ++s.losses;
    } else {
      ++s.ties;
    }
  }
  const std::size_t m = s.wins + s.losses;
  if (m == 0) return s;
  const std::size_t k = std::min(s.wins, s.losses);
  double tail = 0.0;
  for (std::size_t i = 0; i <= k; ++i) tail += std::exp(log_binomial_pmf(m, i));
  s.p_value = std::min(1.0, 2.0 * tail);
  return s;
}

std::vector<std::vector<std::vector<Eigen::Index>>> make_folds(std::size_t groups, Eigen::Index n, int n_folds,
                                                               std::uint64_t rng_seed) {
  if (n_folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (n < n_folds) throw ConfigError("degenerate fold: " + std::to_string(n) + " samples cannot fill " +
                                     std::to_string(n_folds) + " folds");
  Rng rng(rng_seed);
  std::vector<std::vector<std::vector<Eigen::Index>>> folds(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index c = 0; c < n; ++c) order[static_cast<std::size_t>(c)] = c;
    rng.shuffle(order);
    folds[g].resize(static_cast<std::size_t>(n_folds));
    for (int f = 0; f < n_folds; ++f) {
      const Eigen::Index lo = n * f / n_folds;
      const Eigen::Index hi = n * (f + 1) / n_folds;
      std::vector<Eigen::Index> held(order.begin() + lo, order.begin() + hi);
      std::sort(held.begin(), held.end());
      folds[g][static_cast<std::size_t>(f)] = std::move(held);
    }
  }
  return folds;
}

std::vector<double> default_lambda_grid(std::size_t K, Eigen::Index n) {
  if (K < 2 || n < 1) throw ConfigError("default lambda grid needs K >= 2 and n >= 1");
  const double anchor = std::sqrt(std::log(static_cast<double>(K)) / static_cast<double>(n));
  std::vector<double> grid;
  for (double c : {0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0}) grid.push_back(c * anchor);
  return grid;
}

namespace {

struct FoldSplit {
  GroupedDataset train;
  GroupedDataset held;
};

std::vector<FoldSplit> split_folds(const GroupedDataset& dataset, int n_folds, std::uint64_t rng_seed) {
  const auto folds = make_folds(dataset.size(), dataset.n(), n_folds, rng_seed);
  std::vector<FoldSplit> splits;
  for (int f = 0; f < n_folds; ++f) {
    std::vector<std::vector<Eigen::Index>> held(dataset.size());
    std::vector<std::vector<Eigen::Index>> keep(dataset.size());
    for (std::size_t g = 0; g < dataset.size(); ++g) {
      held[g] = folds[g][static_cast<std::size_t>(f)];
      keep[g] = complement(dataset.n(), held[g]);
      if (keep[g].empty() || held[g].empty()) throw ConfigError("degenerate fold: empty train or validation split");
    }
    splits.push_back({dataset.columns(keep), dataset.columns(held)});
  }
  return splits;
}

// Runs body(task) for task in [0, count) on `threads` threads, rethrowing
// the first exception afterwards.
template <class Body>
void run_tasks(std::size_t count, int threads, Body&& body) {
  std::exception_ptr error;
#pragma omp parallel for num_threads(std::max(threads, 1)) schedule(dynamic)
  for (long long task = 0; task < static_cast<long long>(count); ++task) {
    try {
      body(static_cast<std::size_t>(task));
    } catch (...) {
#pragma omp critical(csc_cv_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

LambdaSelection select_lambda(const GroupedDataset& dataset, const CscConfig& config_template,
                              const std::vector<double>& grid, int n_folds, std::uint64_t rng_seed, int threads) {
  if (grid.empty()) throw ConfigError("select_lambda: empty lambda grid");
  if (dataset.empty()) throw ConfigError("select_lambda: dataset has no groups");
  const std::vector<FoldSplit> splits = split_folds(dataset, n_folds, rng_seed);

  LambdaSelection out;
  out.grid = grid;
  out.fold_error.assign(grid.size(), std::vector<double>(splits.size(), 0.0));
  const std::size_t folds = splits.size();
  run_tasks(grid.size() * folds, threads, [&](std::size_t task) {
    const std::size_t i = task / folds;
    const std::size_t f = task % folds;
    CscConfig config = config_template;
    config.lambda = grid[i];
    const CscFitResult fit = csc_fit(splits[f].train, config);
    out.fold_error[i][f] = prediction_error(fit.model.regression_matrices(), splits[f].held);
  });

  out.cv_error.resize(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double total = 0.0;
    for (double e : out.fold_error[i]) total += e;
    out.cv_error[i] = total / static_cast<double>(folds);
    if (i == 0) continue;
    const bool better = out.cv_error[i] < out.cv_error[best];
    const bool tie_larger = out.cv_error[i] == out.cv_error[best] && grid[i] > grid[best];
    if (better || tie_larger) best = i;
  }
  out.best_lambda = grid[best];
  return out;
}

std::vector<double> default_radius_multipliers() { return {0.1, 0.2, 0.35, 0.5, 0.7, 1.0, 1.5}; }

RadiusSelection select_rrr_radius(const GroupedDataset& dataset, const RrrConfig& config,
                                  const std::vector<double>& multipliers, int n_folds, std::uint64_t rng_seed,
                                  int threads) {
  if (multipliers.empty()) throw ConfigError("select_rrr_radius: empty grid");
  const std::vector<FoldSplit> splits = split_folds(dataset, n_folds, rng_seed);
  const std::size_t G = dataset.size();
  const std::size_t M = multipliers.size();

  RadiusSelection out;
  out.multipliers = multipliers;
  out.radii.resize(G);
  out.cv_error.assign(G, std::vector<double>(M, 0.0));
  std::vector<double> anchors(G);
  for (std::size_t g = 0; g < G; ++g) anchors[g] = std::max(least_squares_radius(dataset[g].X, dataset[g].Y), 1e-12);

  run_tasks(G * M, threads, [&](std::size_t task) {
    const std::size_t g = task / M;
    const std::size_t m = task % M;
    RrrConfig c = config;
    c.radius = multipliers[m] * anchors[g];
    double total = 0.0;
    for (const FoldSplit& split : splits) {
      const RrrResult r = rrr_fit(split.train[g].X, split.train[g].Y, c);
      total += rrr_objective(split.held[g].X, split.held[g].Y, r.B);
    }
    out.cv_error[g][m] = total / static_cast<double>(splits.size());
  });

  for (std::size_t g = 0; g < G; ++g) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < M; ++m) {
      const double e = out.cv_error[g][m];
      const double b = out.cv_error[g][best];
      if (e < b || (e == b && multipliers[m] < multipliers[best])) best = m;
    }
    out.radii[g] = multipliers[best] * anchors[g];
  }
  return out;
}

std::string diagnostics_report(const FitDiagnostics& diag) {
  std::ostringstream os;
  os << std::setw(11) << "alternation" << std::setw(18) << "objective" << std::setw(10) << "mean_l0" << std::setw(12)
     << "mean_l1" << std::setw(14) << "stationarity" << "  entry_ranks\n";
  for (std::size_t t = 0; t < diag.alternations(); ++t) {
    os << std::setw(11) << t + 1 << std::setw(18) << std::setprecision(10) << diag.objective[t] << std::setw(10)
       << std::setprecision(4) << diag.mean_l0(t) << std::setw(12) << std::setprecision(6) << diag.mean_l1(t)
       << std::setw(14) << std::setprecision(3) << (t < diag.stationarity.size() ? diag.stationarity[t] : 0.0) << " ";
    for (int r : diag.rank[t]) os << ' ' << r;
    os << '\n';
  }
  if (diag.alternations() > 0) {
    os << "sparsity warning: " << (diag.sparsity_warning ? "YES" : "no") << " (mean l0 first "
       << diag.mean_l0(0) << ", final " << diag.mean_l0(diag.alternations() - 1) << ")\n";
  }
  return os.str();
}

}  // namespace csc
