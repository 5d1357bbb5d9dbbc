#pragma once

#include "csc/dataset.hpp"
#include "csc/dictionary.hpp"

#include <string>
#include <vector>

namespace csc {

/// Transformed regressors Z_k = D_k X for one group, stored flattened
/// (column k of `features` is vec(Z_k), column-major q x n), with the
/// Gram quantities the coordinate updates need.
struct FeatureBundle {
  std::size_t group_id = 0;
  Eigen::Index q = 0;
  Eigen::Index n = 0;
  Matrix features;        // (q*n) x K
  Matrix response;        // q x n
  Vector gram_diag;       // (1/n) <Z_k, Z_k>
  Matrix gram;            // (1/n) <Z_k, Z_l>
  Vector correlation;     // (1/n) <Z_k, Y>
  double response_energy = 0.0;  // (1/n) ||Y||_F^2

  std::size_t K() const { return static_cast<std::size_t>(features.cols()); }
  Eigen::Map<const Matrix> feature(std::size_t k) const {
    return {features.col(static_cast<Eigen::Index>(k)).data(), q, n};
  }
};

struct EncoderOptions {
  double tol = 1e-8;
  int max_sweeps = 1000;
  bool record_objective = false;
};

struct EncodeResult {
  Vector alpha;
  int sweeps = 0;
  double kkt_violation = 0.0;
  double max_change = 0.0;
  bool converged = false;
  /// Objective before the first sweep and after each sweep, when recorded.
  std::vector<double> objective_trace;
};

/// Throws DimensionError naming group_id and the offending entry.
FeatureBundle build_features(const Dictionary& dictionary, const Matrix& X, const Matrix& Y,
                             std::size_t group_id = 0);

/// (1/n)||Y - sum_k alpha_k Z_k||_F^2 + lambda ||alpha||_1 from the Gram form.
double encoding_objective(const FeatureBundle& bundle, const Vector& alpha, double lambda);

/// Largest violation of the lasso optimality conditions at alpha.
double kkt_violation(const FeatureBundle& bundle, const Vector& alpha, double lambda);

/// Cyclic coordinate descent for
///   min_alpha (1/n) sum_i ||Y_i - sum_k alpha_k D_k X_i||^2 + lambda ||alpha||_1.
/// An empty warm_start means a cold start from zero. Non-convergence is
/// reported through EncodeResult::converged; the iterate is still returned.
EncodeResult lasso_encode(const FeatureBundle& bundle, double lambda, const EncoderOptions& options = {},
                          const Vector& warm_start = Vector());

struct EncodeAllResult {
  GroupCoefficients coefficients;
  std::vector<EncodeResult> groups;
  /// One message per group that hit max_sweeps.
  std::vector<std::string> warnings;
};

/// Independent lasso per group. Results do not depend on the thread count.
EncodeAllResult encode_all(const Dictionary& dictionary, const GroupedDataset& dataset, double lambda,
                           const EncoderOptions& options = {}, const GroupCoefficients* warm_start = nullptr,
                           const Exec& exec = {});

}  // namespace csc
