#include "csc/encoder.hpp"

#include "csc/kernels.hpp"
#include "csc/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace csc {

namespace {

// Coordinate updates run on the Gram form: with H = (1/n) Z^T Z and
// c = (1/n) Z^T Y, rho_k = c_k - (H alpha)_k + H_kk alpha_k is exactly
// (1/n) <Z_k, residual + alpha_k Z_k>.
double partial_correlation(const FeatureBundle& b, const Vector& h_alpha, const Vector& alpha, Eigen::Index k) {
  return b.correlation[k] - h_alpha[k] + b.gram(k, k) * alpha[k];
}

}  // namespace

FeatureBundle build_features(const Dictionary& dictionary, const Matrix& X, const Matrix& Y, std::size_t group_id) {
  const std::string where = "group " + std::to_string(group_id);
  if (dictionary.K() == 0) throw DimensionError(where + ": empty dictionary");
  if (X.cols() != Y.cols())
    throw DimensionError(where + ": X has " + std::to_string(X.cols()) + " samples but Y has " +
                         std::to_string(Y.cols()));
  for (std::size_t k = 0; k < dictionary.K(); ++k) {
    const Matrix& d = dictionary.entries[k];
    if (d.cols() != X.rows() || d.rows() != Y.rows())
      throw DimensionError(where + ", dictionary entry " + std::to_string(k) + ": entry is " +
                           std::to_string(d.rows()) + "x" + std::to_string(d.cols()) + " but data needs " +
                           std::to_string(Y.rows()) + "x" + std::to_string(X.rows()));
  }

  FeatureBundle b;
  b.group_id = group_id;
  b.q = Y.rows();
  b.n = Y.cols();
  b.response = Y;
  const auto K = static_cast<Eigen::Index>(dictionary.K());
  const double inv_n = b.n > 0 ? 1.0 / static_cast<double>(b.n) : 0.0;

  b.features.resize(b.q * b.n, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    Eigen::Map<Matrix> z(b.features.col(k).data(), b.q, b.n);
    z.noalias() = dictionary.entries[static_cast<std::size_t>(k)] * X;
  }
  const Eigen::Map<const Vector> y(Y.data(), Y.size());

  b.gram.resize(K, K);
  b.gram.setZero();
  b.gram.selfadjointView<Eigen::Lower>().rankUpdate(b.features.transpose(), inv_n);
  b.gram.triangularView<Eigen::StrictlyUpper>() = b.gram.transpose();
  b.gram_diag.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    b.gram_diag[k] = b.features.col(k).squaredNorm() * inv_n;
    b.gram(k, k) = b.gram_diag[k];
  }
  b.correlation = (b.features.transpose() * y) * inv_n;
  b.response_energy = y.squaredNorm() * inv_n;
  if (!b.gram.allFinite() || !b.correlation.allFinite() || !std::isfinite(b.response_energy))
    throw NumericalError("encoder: feature moments overflow");
  return b;
}

double encoding_objective(const FeatureBundle& b, const Vector& alpha, double lambda) {
  const double fit = b.response_energy - 2.0 * b.correlation.dot(alpha) + alpha.dot(b.gram * alpha);
  return std::max(fit, 0.0) + lambda * alpha.lpNorm<1>();
}

double kkt_violation(const FeatureBundle& b, const Vector& alpha, double lambda) {
  const Vector h_alpha = b.gram * alpha;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    if (b.gram_diag[k] <= 0.0) continue;
    // (2/n) <Z_k, residual>
    const double g = 2.0 * (b.correlation[k] - h_alpha[k]);
    const double v = alpha[k] != 0.0 ? std::abs(g - lambda * (alpha[k] > 0.0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(g) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

EncodeResult lasso_encode(const FeatureBundle& b, double lambda, const EncoderOptions& options,
                          const Vector& warm_start) {
  if (!(lambda >= 0.0)) throw ConfigError("lasso_encode: lambda must be nonnegative");
  if (!(options.tol > 0.0) || options.max_sweeps < 1) throw ConfigError("lasso_encode: invalid tolerance or sweep budget");
  const auto K = static_cast<Eigen::Index>(b.K());

  EncodeResult r;
  if (warm_start.size() == 0) {
    r.alpha = Vector::Zero(K);
  } else {
    if (warm_start.size() != K) throw DimensionError("lasso_encode: warm start has wrong length");
    r.alpha = warm_start;
  }
  for (Eigen::Index k = 0; k < K; ++k)
    if (b.gram_diag[k] <= 0.0) r.alpha[k] = 0.0;

  Vector h_alpha = b.gram * r.alpha;
  if (options.record_objective) r.objective_trace.push_back(encoding_objective(b, r.alpha, lambda));

  const double half_lambda = 0.5 * lambda;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      const double diag = b.gram_diag[k];
      if (diag <= 0.0) continue;
      const double rho = partial_correlation(b, h_alpha, r.alpha, k);
      const double updated = soft_threshold(rho, half_lambda) / diag;
      const double delta = updated - r.alpha[k];
      if (delta != 0.0) {
        r.alpha[k] = updated;
        h_alpha.noalias() += delta * b.gram.col(k);
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    // Drop accumulated rounding in the running product.
    h_alpha.noalias() = b.gram * r.alpha;
    r.sweeps = sweep;
    r.max_change = max_change;
    if (options.record_objective) r.objective_trace.push_back(encoding_objective(b, r.alpha, lambda));
    if (max_change < options.tol) {
      r.kkt_violation = kkt_violation(b, r.alpha, lambda);
      if (r.kkt_violation < options.tol) {
        r.converged = true;
        return r;
      }
    }
  }
  r.kkt_violation = kkt_violation(b, r.alpha, lambda);
  r.converged = r.kkt_violation < options.tol && r.max_change < options.tol;
  return r;
}

EncodeAllResult encode_all(const Dictionary& dictionary, const GroupedDataset& dataset, double lambda,
                           const EncoderOptions& options, const GroupCoefficients* warm_start, const Exec& exec) {
  if (warm_start != nullptr && warm_start->size() != dataset.size())
    throw DimensionError("encode_all: warm start covers " + std::to_string(warm_start->size()) + " groups, dataset has " +
                         std::to_string(dataset.size()));
  EncodeAllResult out;
  out.groups = exec.parallel()
                   ? kernels::omp::encode_groups(dictionary, dataset, lambda, options, warm_start, exec.threads)
                   : kernels::serial::encode_groups(dictionary, dataset, lambda, options, warm_start);
  out.coefficients.alphas.reserve(out.groups.size());
  for (std::size_t g = 0; g < out.groups.size(); ++g) {
    const EncodeResult& r = out.groups[g];
    out.coefficients.alphas.push_back(r.alpha);
    if (!r.converged)
      out.warnings.push_back("group " + std::to_string(g) + ": lasso stopped after " + std::to_string(r.sweeps) +
                             " sweeps with KKT violation " + std::to_string(r.kkt_violation));
  }
  return out;
}

}  // namespace csc
