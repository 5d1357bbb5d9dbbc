#pragma once

#include "csc/dataset.hpp"

#include <cstdint>
#include <vector>

namespace csc {

/// Separate per-group regression constrained to a nuclear-norm ball:
///   B_hat = argmin_{||B||_* <= radius} (1/n) sum_i ||Y_i - B X_i||^2.
struct RrrConfig {
  /// Nuclear-ball radius L. A nonpositive value asks rrr_fit_all for the
  /// per-group default (nuclear norm of the least-squares fit).
  double radius = 0.0;
  int max_iterations = 2000;
  /// Exit once ||B - P(B - eta grad)||_F falls below this.
  double rtol = 1e-8;
  /// Not used by the deterministic solver.
  std::uint64_t rng_seed = 0;
};

struct RrrResult {
  Matrix B;
  double objective = 0.0;
  double stationarity = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Objective at the start point and after every iteration.
  std::vector<double> objective_trace;
};

/// (1/n)||Y - B X||_F^2.
double rrr_objective(const Matrix& X, const Matrix& Y, const Matrix& B);

/// Monotone accelerated projected gradient from B = 0.
RrrResult rrr_fit(const Matrix& X, const Matrix& Y, const RrrConfig& config);

/// Nuclear norm of the minimum-norm least-squares fit Y X^+.
double least_squares_radius(const Matrix& X, const Matrix& Y);

/// Per-group default radii; requires n >= p (otherwise the radius has to
/// come from cross-validation, see select_rrr_radius).
std::vector<double> default_radii(const GroupedDataset& dataset);

struct RrrFitAllResult {
  std::vector<Matrix> estimates;
  std::vector<RrrResult> groups;
  std::vector<double> radii;
};

/// Independent fits per group; radius from config or default_radii.
RrrFitAllResult rrr_fit_all(const GroupedDataset& dataset, const RrrConfig& config, const Exec& exec = {});
RrrFitAllResult rrr_fit_all(const GroupedDataset& dataset, const std::vector<double>& radii, const RrrConfig& config,
                            const Exec& exec = {});

}  // namespace csc
