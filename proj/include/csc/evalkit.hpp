#pragma once

#include "csc/baseline.hpp"
#include "csc/dataset.hpp"
#include "csc/dictlearn.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace csc {

struct EvalReport {
  double estimation_error = 0.0;  // meaningful only when ground truth was given
  double prediction_error = 0.0;
  std::vector<double> per_group_prediction_error;
  bool has_estimation_error = false;
};

/// (1/G) sum_g ||B*_g - B_hat_g||_F.
double estimation_error(const std::vector<Matrix>& B_hat, const std::vector<Matrix>& B_star);

/// (1/n)||Y - B_hat X||_F^2 for each group.
std::vector<double> per_group_prediction_error(const std::vector<Matrix>& B_hat, const GroupedDataset& test);
/// Mean of per_group_prediction_error.
double prediction_error(const std::vector<Matrix>& B_hat, const GroupedDataset& test);

EvalReport evaluate(const std::vector<Matrix>& B_hat, const GroupedDataset& test,
                    const std::vector<Matrix>* B_star = nullptr);

// ---------------------------------------------------------------------------
// Pairwise held-out classification

enum class Metric { euclidean, cosine_distance };

std::string to_string(Metric m);
Metric parse_metric(const std::string& name);

/// Raised when cosine distance meets a zero vector.
class UndefinedMetricError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

double distance(const Vector& a, const Vector& b, Metric metric);

struct PairOutcome {
  bool correct_2v2 = false;
  bool correct_1v2 = false;
};

/// 2v2: d(y1, yhat1) + d(y2, yhat2) < d(y1, yhat2) + d(y2, yhat1).
/// 1v2: d(y1, yhat1) < d(y1, yhat2) and d(y2, yhat2) < d(y2, yhat1).
/// Ties are incorrect.
PairOutcome classify_pair(const Vector& y1, const Vector& y2, const Vector& yhat1, const Vector& yhat2,
                          Metric metric = Metric::euclidean);

struct PairEvalReport {
  double acc_2v2 = 0.0;
  double acc_1v2 = 0.0;
  double mean_squared_error = 0.0;
  std::size_t n_trials = 0;
};

struct HoldoutTrial {
  Eigen::Index first = 0;
  Eigen::Index second = 0;
  bool failed = false;
  std::string error;
  std::vector<bool> correct_2v2;      // per group
  std::vector<bool> correct_1v2;      // per group
  std::vector<double> squared_error;  // per group, mean over the two held-out samples
};

struct HoldoutResult {
  std::vector<PairEvalReport> per_group;
  std::vector<HoldoutTrial> trials;
  std::size_t failed_trials = 0;
};

/// Fits one regression matrix per group from training data.
using FitProcedure = std::function<std::vector<Matrix>(const GroupedDataset& train)>;

/// Repeatedly removes the same two sample columns from every group, fits on
/// the rest and scores the pair. Pairs are drawn without replacement while
/// distinct pairs remain, with replacement beyond that. A trial whose fit
/// throws is recorded as failed and left out of the means.
HoldoutResult hold_two_out_cv(const GroupedDataset& dataset, const FitProcedure& fit, std::size_t n_trials,
                              Metric metric, std::uint64_t rng_seed);

struct SignTest {
  std::size_t wins = 0;    // first sample better
  std::size_t losses = 0;  // second sample better
  std::size_t ties = 0;
  double p_value = 1.0;    // two-sided exact binomial
};

/// Paired sign test; `higher_is_better` picks the direction of a win.
SignTest paired_sign_test(const std::vector<double>& first, const std::vector<double>& second,
                          bool higher_is_better = true);

// ---------------------------------------------------------------------------
// Cross-validated tuning

/// Column-wise K-fold assignment, independently shuffled per group.
/// folds[g][f] lists the held-out columns of group g in fold f.
std::vector<std::vector<std::vector<Eigen::Index>>> make_folds(std::size_t groups, Eigen::Index n, int n_folds,
                                                               std::uint64_t rng_seed);

/// { c * sqrt(log K / n) : c in {0.01, 0.03, 0.1, 0.3, 1, 3, 10} }.
std::vector<double> default_lambda_grid(std::size_t K, Eigen::Index n);

struct LambdaSelection {
  double best_lambda = 0.0;
  std::vector<double> grid;
  std::vector<double> cv_error;                  // per grid value
  std::vector<std::vector<double>> fold_error;   // [grid][fold]
};

/// Picks the lambda with the lowest mean held-out prediction error; exact
/// ties go to the larger lambda. `threads` runs (lambda, fold) fits
/// concurrently; each fit uses config_template.exec.
LambdaSelection select_lambda(const GroupedDataset& dataset, const CscConfig& config_template,
                              const std::vector<double>& grid, int n_folds, std::uint64_t rng_seed, int threads = 1);

struct RadiusSelection {
  std::vector<double> radii;               // chosen radius per group
  std::vector<double> multipliers;
  std::vector<std::vector<double>> cv_error;  // [group][multiplier]
};

/// Multipliers applied to each group's least-squares nuclear norm.
std::vector<double> default_radius_multipliers();

/// Per-group cross-validated nuclear-ball radius for the separate
/// regressions; ties go to the smaller radius.
RadiusSelection select_rrr_radius(const GroupedDataset& dataset, const RrrConfig& config,
                                  const std::vector<double>& multipliers, int n_folds, std::uint64_t rng_seed,
                                  int threads = 1);

// ---------------------------------------------------------------------------
// Diagnostics

/// Plain-text table: one row per alternation with objective, mean l0/l1 and
/// per-entry ranks, followed by the sparsity verdict.
std::string diagnostics_report(const FitDiagnostics& diagnostics);

}  // namespace csc
