#pragma once

#include "csc/dataset.hpp"
#include "csc/dictionary.hpp"
#include "csc/encoder.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace csc {

struct CscConfig {
  std::size_t K = 20;
  double lambda = 0.1;
  /// Nuclear-norm budget per codeword; (0, 1] is the recommended range.
  double tau = 1.0;
  int max_alternations = 200;
  double objective_rtol = 1e-6;
  double encoder_tol = 1e-8;
  int encoder_max_sweeps = 1000;
  int max_inner_iterations = 50;
  bool warm_start = true;
  std::uint64_t rng_seed = 0;
  Exec exec;

  /// Throws ConfigError for unusable values; returns warnings (e.g. tau
  /// outside (0, 1]) for values that are usable but off-recommendation.
  std::vector<std::string> validate() const;
};

/// Per-alternation record of a CSC fit.
struct FitDiagnostics {
  std::vector<double> objective;
  std::vector<std::vector<int>> l0;     // [alternation][group]
  std::vector<std::vector<double>> l1;  // [alternation][group]
  std::vector<std::vector<int>> rank;   // [alternation][entry]
  std::vector<double> stationarity;     // dictionary step proxy per alternation
  bool sparsity_warning = false;
  bool converged = false;

  std::size_t alternations() const { return objective.size(); }
  double mean_l0(std::size_t alternation) const;
  double mean_l1(std::size_t alternation) const;
};

struct CscModel {
  Dictionary dictionary;
  GroupCoefficients coefficients;
  CscConfig config;

  /// B_hat^(g) for every group.
  std::vector<Matrix> regression_matrices() const;
};

/// (1/G) sum_g [ (1/n)||Y - B_g X||_F^2 + lambda ||alpha^(g)||_1 ].
double objective(const Dictionary& dictionary, const GroupCoefficients& coefficients, const GroupedDataset& dataset,
                 double lambda);

/// Smooth term only (lambda = 0).
double smooth_objective(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                        const GroupedDataset& dataset, const Exec& exec = {});

/// grad_{D_k} = -(2 / (G n)) sum_g alpha_k^(g) (Y - B_g X) X^T.
std::vector<Matrix> dictionary_gradient(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                                        const GroupedDataset& dataset, const Exec& exec = {});

struct DictionaryStepOptions {
  int max_inner_iterations = 50;
  double stationarity_tol = 1e-8;
  int power_iterations = 20;
  double power_tol = 1e-6;
  Exec exec;
};

struct DictionaryStepResult {
  Dictionary dictionary;
  double smooth_before = 0.0;
  double smooth_after = 0.0;
  /// ||D - P(D - eta grad)||_F at the returned dictionary.
  double stationarity = 0.0;
  double step_size = 0.0;
  int iterations = 0;
};

/// Initial step-size estimate: (2/G) max_k sum_g (alpha_k^(g))^2 ||(1/n) X X^T||_2.
double lipschitz_estimate(const GroupCoefficients& coefficients, const GroupedDataset& dataset,
                          int power_iterations = 20, double power_tol = 1e-6);

/// Monotone accelerated projected gradient on all codewords jointly. The
/// smooth objective of the returned dictionary never exceeds the input's.
/// Throws NumericalError if backtracking drives the step below 1e-16.
DictionaryStepResult dictionary_step(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                                     const GroupedDataset& dataset, const DictionaryStepOptions& options = {});

/// K random rank-one codewords min(tau, 1) u v^T with u, v uniform unit vectors.
Dictionary init_dictionary(std::size_t K, Eigen::Index p, Eigen::Index q, double tau, std::uint64_t rng_seed);

struct CscFitResult {
  CscModel model;
  FitDiagnostics diagnostics;
  std::vector<std::string> warnings;
};

/// Alternates encoding and dictionary steps from a random initial
/// dictionary until the relative objective change drops below
/// objective_rtol or max_alternations is reached.
CscFitResult csc_fit(const GroupedDataset& dataset, const CscConfig& config);

/// Same alternation from a caller-supplied feasible dictionary.
CscFitResult csc_fit_from(const GroupedDataset& dataset, const CscConfig& config, Dictionary initial);

}  // namespace csc
