#include "csc/dictlearn.hpp"

#include "csc/kernels.hpp"
#include "csc/matcore.hpp"
#include "csc/rng.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace csc {

namespace {

constexpr double kMinStepSize = 1e-16;

kernels::SmoothTerms smooth_terms(const Dictionary& d, const GroupCoefficients& c, const GroupedDataset& data,
                                  const Exec& exec) {
  return exec.parallel() ? kernels::omp::smooth_gradient(d, c, data, exec.threads, exec.ordered_reduction)
                         : kernels::serial::smooth_gradient(d, c, data);
}

double l1_sum(const GroupCoefficients& c) {
  double total = 0.0;
  for (const Vector& a : c.alphas) total += a.lpNorm<1>();
  return total;
}

Dictionary projected_step(const Dictionary& from, const std::vector<Matrix>& gradient, double eta) {
  Dictionary out;
  out.tau = from.tau;
  out.entries.reserve(from.K());
  for (std::size_t k = 0; k < from.K(); ++k)
    out.entries.push_back(project_to_dictionary_set(from.entries[k] - eta * gradient[k], from.tau));
  return out;
}

double distance_squared(const Dictionary& a, const Dictionary& b) {
  double total = 0.0;
  for (std::size_t k = 0; k < a.K(); ++k) total += (a.entries[k] - b.entries[k]).squaredNorm();
  return total;
}

double inner(const std::vector<Matrix>& grad, const Dictionary& a, const Dictionary& b) {
  double total = 0.0;
  for (std::size_t k = 0; k < grad.size(); ++k) total += (grad[k].array() * (a.entries[k] - b.entries[k]).array()).sum();
  return total;
}

struct Candidate {
  Dictionary point;
  double value = 0.0;
};

// Backtracking: halve eta until the quadratic upper model at `from` holds
// at the projected point.
Candidate backtrack(const Dictionary& from, double from_value, const std::vector<Matrix>& gradient, double& eta,
                    const GroupCoefficients& coefficients, const GroupedDataset& data, const Exec& exec) {
  const double slack = 1e-12 * std::max(1.0, std::abs(from_value));
  while (true) {
    Candidate c;
    c.point = projected_step(from, gradient, eta);
    c.value = smooth_objective(c.point, coefficients, data, exec);
    const double model =
        from_value + inner(gradient, c.point, from) + distance_squared(c.point, from) / (2.0 * eta);
    if (c.value <= model + slack) return c;
    eta *= 0.5;
    if (eta < kMinStepSize) throw NumericalError("dictionary_step: step size underflow in backtracking");
  }
}

// Power iteration for ||(1/n) X X^T||_2.
double covariance_norm(const Matrix& X, int iterations, double tol) {
  const Eigen::Index p = X.rows();
  if (p == 0 || X.cols() == 0) return 0.0;
  Vector v(p);
  for (Eigen::Index i = 0; i < p; ++i) v[i] = 1.0 + static_cast<double>(i) / static_cast<double>(p);
  v.normalize();
  const double inv_n = 1.0 / static_cast<double>(X.cols());
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = X * (X.transpose() * v) * inv_n;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const double previous = estimate;
    estimate = norm;
    if (std::abs(estimate - previous) <= tol * estimate) break;
  }
  return estimate;
}

void record(FitDiagnostics& diag, const Dictionary& d, const GroupCoefficients& c, double value,
            double stationarity) {
  diag.objective.push_back(value);
  diag.stationarity.push_back(stationarity);
  std::vector<int> l0;
  std::vector<double> l1;
  for (const Vector& a : c.alphas) {
    l0.push_back(static_cast<int>((a.array() != 0.0).count()));
    l1.push_back(a.lpNorm<1>());
  }
  diag.l0.push_back(std::move(l0));
  diag.l1.push_back(std::move(l1));
  std::vector<int> ranks;
  for (const Matrix& e : d.entries) ranks.push_back(numerical_rank(e));
  diag.rank.push_back(std::move(ranks));
}

}  // namespace

std::vector<std::string> CscConfig::validate() const {
  if (K < 1) throw ConfigError("K must be at least 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be a finite nonnegative number");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be positive");
  if (max_alternations < 1) throw ConfigError("max_alternations must be at least 1");
  if (!(objective_rtol > 0.0)) throw ConfigError("objective_rtol must be positive");
  if (!(encoder_tol > 0.0) || encoder_max_sweeps < 1) throw ConfigError("invalid encoder tolerance or sweep budget");
  if (max_inner_iterations < 1) throw ConfigError("max_inner_iterations must be at least 1");
  if (exec.threads < 1) throw ConfigError("threads must be at least 1");
  std::vector<std::string> warnings;
  if (tau > 1.0) warnings.push_back("tau = " + std::to_string(tau) + " is outside the recommended range (0, 1]");
  return warnings;
}

double FitDiagnostics::mean_l0(std::size_t t) const {
  const auto& row = l0.at(t);
  if (row.empty()) return 0.0;
  double total = 0.0;
  for (int v : row) total += v;
  return total / static_cast<double>(row.size());
}

double FitDiagnostics::mean_l1(std::size_t t) const {
  const auto& row = l1.at(t);
  if (row.empty()) return 0.0;
  double total = 0.0;
  for (double v : row) total += v;
  return total / static_cast<double>(row.size());
}

std::vector<Matrix> CscModel::regression_matrices() const {
  std::vector<Matrix> out;
  out.reserve(coefficients.size());
  for (const Vector& a : coefficients.alphas) out.push_back(compose_B(dictionary, a));
  return out;
}

double smooth_objective(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                        const GroupedDataset& dataset, const Exec& exec) {
  return exec.parallel()
             ? kernels::omp::smooth_value(dictionary, coefficients, dataset, exec.threads, exec.ordered_reduction)
             : kernels::serial::smooth_value(dictionary, coefficients, dataset);
}

double objective(const Dictionary& dictionary, const GroupCoefficients& coefficients, const GroupedDataset& dataset,
                 double lambda) {
  const double smooth = smooth_objective(dictionary, coefficients, dataset);
  if (dataset.empty()) return 0.0;
  return smooth + lambda * l1_sum(coefficients) / static_cast<double>(dataset.size());
}

std::vector<Matrix> dictionary_gradient(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                                        const GroupedDataset& dataset, const Exec& exec) {
  return smooth_terms(dictionary, coefficients, dataset, exec).gradient;
}

double lipschitz_estimate(const GroupCoefficients& coefficients, const GroupedDataset& dataset, int power_iterations,
                          double power_tol) {
  if (dataset.empty() || coefficients.size() != dataset.size()) return 0.0;
  std::vector<double> norms(dataset.size());
  for (std::size_t g = 0; g < dataset.size(); ++g)
    norms[g] = covariance_norm(dataset[g].X, power_iterations, power_tol);
  const Eigen::Index K = coefficients[0].size();
  double best = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    double total = 0.0;
    for (std::size_t g = 0; g < dataset.size(); ++g) total += coefficients[g][k] * coefficients[g][k] * norms[g];
    best = std::max(best, total);
  }
  return 2.0 * best / static_cast<double>(dataset.size());
}

DictionaryStepResult dictionary_step(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                                     const GroupedDataset& dataset, const DictionaryStepOptions& options) {
  if (options.max_inner_iterations < 1) throw ConfigError("dictionary_step: max_inner_iterations must be >= 1");
  dictionary.check_shapes();
  const Exec& exec = options.exec;

  DictionaryStepResult out;
  kernels::SmoothTerms at_x = smooth_terms(dictionary, coefficients, dataset, exec);
  out.smooth_before = at_x.value;
  out.dictionary = dictionary;
  out.smooth_after = at_x.value;

  double grad_norm = 0.0;
  for (const Matrix& g : at_x.gradient) grad_norm = std::max(grad_norm, g.cwiseAbs().maxCoeff());
  const double lipschitz = lipschitz_estimate(coefficients, dataset, options.power_iterations, options.power_tol);
  if (grad_norm == 0.0 || !(lipschitz > 0.0)) return out;

  double eta = 1.0 / lipschitz;
  Dictionary x = dictionary;
  double fx = at_x.value;
  std::vector<Matrix> grad_x = std::move(at_x.gradient);
  bool grad_x_valid = true;

  Dictionary y = x;
  double fy = fx;
  std::vector<Matrix> grad_y = grad_x;
  double t = 1.0;

  for (int it = 1; it <= options.max_inner_iterations; ++it) {
    out.iterations = it;
    Candidate z = backtrack(y, fy, grad_y, eta, coefficients, dataset, exec);
    const double mapping = std::sqrt(distance_squared(z.point, y));

    Dictionary x_prev = x;
    bool restart = false;
    if (z.value <= fx) {
      x = std::move(z.point);
      fx = z.value;
      grad_x_valid = false;
    } else {
      // Accelerated point went uphill: take a plain projected-gradient
      // step from the current best instead and restart the momentum.
      if (!grad_x_valid) {
        grad_x = smooth_terms(x, coefficients, dataset, exec).gradient;
        grad_x_valid = true;
      }
      Candidate w = backtrack(x, fx, grad_x, eta, coefficients, dataset, exec);
      if (w.value > fx) break;
      x = std::move(w.point);
      fx = w.value;
      grad_x_valid = false;
      restart = true;
    }

    if (mapping < options.stationarity_tol) break;

    if (restart) {
      t = 1.0;
      y = x;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double momentum = (t - 1.0) / t_next;
      y = x;
      for (std::size_t k = 0; k < y.K(); ++k) y.entries[k] += momentum * (x.entries[k] - x_prev.entries[k]);
      t = t_next;
    }
    kernels::SmoothTerms at_y = smooth_terms(y, coefficients, dataset, exec);
    fy = at_y.value;
    grad_y = std::move(at_y.gradient);
    if (restart) {
      grad_x = grad_y;
      grad_x_valid = true;
    }
  }

  if (!grad_x_valid) grad_x = smooth_terms(x, coefficients, dataset, exec).gradient;
  out.stationarity = std::sqrt(distance_squared(x, projected_step(x, grad_x, eta)));
  out.step_size = eta;
  out.smooth_after = fx;
  out.dictionary = std::move(x);
  return out;
}

Dictionary init_dictionary(std::size_t K, Eigen::Index p, Eigen::Index q, double tau, std::uint64_t rng_seed) {
  if (K < 1) throw ConfigError("init_dictionary: K must be at least 1");
  if (p < 1 || q < 1) throw ConfigError("init_dictionary: p and q must be positive");
  if (!(tau > 0.0)) throw ConfigError("init_dictionary: tau must be positive");
  Rng rng(rng_seed);
  const double scale = std::min(tau, 1.0);
  Dictionary d;
  d.tau = tau;
  d.entries.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Vector u = rng.unit_vector(q);
    const Vector v = rng.unit_vector(p);
    d.entries.push_back(scale * u * v.transpose());
  }
  return d;
}

CscFitResult csc_fit(const GroupedDataset& dataset, const CscConfig& config) {
  config.validate();
  if (dataset.empty()) throw ConfigError("csc_fit: dataset has no groups");
  return csc_fit_from(dataset, config,
                      init_dictionary(config.K, dataset.p(), dataset.q(), config.tau, config.rng_seed));
}

CscFitResult csc_fit_from(const GroupedDataset& dataset, const CscConfig& config, Dictionary initial) {
  CscFitResult out;
  out.warnings = config.validate();
  if (dataset.empty()) throw ConfigError("csc_fit: dataset has no groups");
  if (dataset.n() == 0) throw ConfigError("csc_fit: groups have no samples");
  initial.check_shapes();
  if (initial.K() != config.K) throw DimensionError("csc_fit: initial dictionary size differs from K");
  if (initial.p() != dataset.p() || initial.q() != dataset.q())
    throw DimensionError("csc_fit: initial dictionary shape does not match the data");
  for (const auto& w : out.warnings) spdlog::warn("{}", w);

  const EncoderOptions encoder{config.encoder_tol, config.encoder_max_sweeps, false};
  DictionaryStepOptions step_options;
  step_options.max_inner_iterations = config.max_inner_iterations;
  step_options.exec = config.exec;

  Dictionary dictionary = std::move(initial);
  dictionary.tau = config.tau;
  GroupCoefficients coefficients = GroupCoefficients::zeros(dataset.size(), config.K);
  const double G = static_cast<double>(dataset.size());
  FitDiagnostics& diag = out.diagnostics;
  double previous = std::numeric_limits<double>::infinity();

  for (int t = 1; t <= config.max_alternations; ++t) {
    EncodeAllResult encoded = encode_all(dictionary, dataset, config.lambda, encoder,
                                         config.warm_start ? &coefficients : nullptr, config.exec);
    if (!encoded.warnings.empty()) {
      spdlog::warn("alternation {}: {} group(s) hit the sweep limit", t, encoded.warnings.size());
      out.warnings.push_back("alternation " + std::to_string(t) + ": " + encoded.warnings.front());
    }
    // Keep the previous coefficients if the new encoding is not at least as
    // good (possible only through solver tolerance on cold starts).
    const double before = smooth_objective(dictionary, coefficients, dataset, config.exec) +
                          config.lambda * l1_sum(coefficients) / G;
    const double after = smooth_objective(dictionary, encoded.coefficients, dataset, config.exec) +
                         config.lambda * l1_sum(encoded.coefficients) / G;
    if (after <= before) coefficients = std::move(encoded.coefficients);

    DictionaryStepResult step = dictionary_step(dictionary, coefficients, dataset, step_options);
    dictionary = std::move(step.dictionary);
    const double value = step.smooth_after + config.lambda * l1_sum(coefficients) / G;
    if (!std::isfinite(value)) throw NumericalError("csc_fit: non-finite objective");
    record(diag, dictionary, coefficients, value, step.stationarity);
    spdlog::debug("alternation {}: objective {:.10g} mean l0 {:.3f} stationarity {:.3g}", t, value,
                  diag.mean_l0(diag.alternations() - 1), step.stationarity);

    if (t > 1 && std::abs(previous - value) <= config.objective_rtol * std::max(std::abs(previous), 1e-300)) {
      diag.converged = true;
      break;
    }
    previous = value;
  }

  diag.sparsity_warning = diag.mean_l0(diag.alternations() - 1) > diag.mean_l0(0);
  out.model.dictionary = std::move(dictionary);
  out.model.coefficients = std::move(coefficients);
  out.model.config = config;
  return out;
}

}  // namespace csc
