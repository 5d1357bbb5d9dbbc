#include "csc/baseline.hpp"

#include "csc/kernels.hpp"
#include "csc/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace csc {

namespace {

constexpr double kMinStepSize = 1e-16;

// Sufficient statistics of one group's least-squares problem.
struct Moments {
  Matrix cov;          // (1/n) X X^T
  Matrix cross;        // (1/n) Y X^T
  double energy = 0.0; // (1/n) ||Y||^2

  double value(const Matrix& B) const {
    return std::max(0.0, energy - 2.0 * (B.array() * cross.array()).sum() + (B * cov).cwiseProduct(B).sum());
  }
  Matrix gradient(const Matrix& B) const { return 2.0 * (B * cov - cross); }
};

struct Point {
  Matrix B;
  double value = 0.0;
};

Point backtrack(const Moments& m, const Matrix& from, double from_value, const Matrix& grad, double radius,
                double& eta) {
  const double slack = 1e-12 * std::max(1.0, std::abs(from_value));
  while (true) {
    Point z;
    z.B = project_nuclear_ball(from - eta * grad, radius);
    z.value = m.value(z.B);
    const Matrix diff = z.B - from;
    const double model = from_value + (grad.array() * diff.array()).sum() + diff.squaredNorm() / (2.0 * eta);
    if (z.value <= model + slack) return z;
    eta *= 0.5;
    if (eta < kMinStepSize) throw NumericalError("rrr_fit: step size underflow in backtracking");
  }
}

double stationarity(const Moments& m, const Matrix& x, double eta, double radius) {
  return (x - project_nuclear_ball(x - eta * m.gradient(x), radius)).norm();
}

}  // namespace

double rrr_objective(const Matrix& X, const Matrix& Y, const Matrix& B) {
  if (B.cols() != X.rows() || B.rows() != Y.rows() || X.cols() != Y.cols())
    throw DimensionError("rrr_objective: shape mismatch");
  return (Y - B * X).squaredNorm() / static_cast<double>(X.cols());
}

RrrResult rrr_fit(const Matrix& X, const Matrix& Y, const RrrConfig& config) {
  if (X.cols() != Y.cols()) throw DimensionError("rrr_fit: X and Y differ in sample count");
  if (X.cols() == 0) throw ConfigError("rrr_fit: no samples");
  if (!(config.radius > 0.0)) throw ConfigError("rrr_fit: radius must be positive");
  if (config.max_iterations < 1 || !(config.rtol > 0.0)) throw ConfigError("rrr_fit: invalid iteration budget or rtol");

  const double inv_n = 1.0 / static_cast<double>(X.cols());
  Moments m;
  m.cov = X * X.transpose() * inv_n;
  m.cross = Y * X.transpose() * inv_n;
  m.energy = Y.squaredNorm() * inv_n;
  if (!m.cov.allFinite() || !m.cross.allFinite() || !std::isfinite(m.energy))
    throw NumericalError("rrr_fit: sample moments overflow");

  RrrResult r;
  Matrix x = Matrix::Zero(Y.rows(), X.rows());
  double fx = m.value(x);
  r.objective_trace.push_back(fx);

  const double lipschitz = 2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(m.cov, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  if (!(lipschitz > 0.0)) {
    r.B = x;
    r.objective = fx;
    r.converged = true;
    return r;
  }
  double eta = 1.0 / lipschitz;

  Matrix y = x;
  double fy = fx;
  Matrix grad_y = m.gradient(y);
  double t = 1.0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    r.iterations = it;
    Point z = backtrack(m, y, fy, grad_y, config.radius, eta);
    const double mapping = (z.B - y).norm();
    const Matrix x_prev = x;
    bool restart = false;
    if (z.value <= fx) {
      x = std::move(z.B);
      fx = z.value;
    } else {
      Point w = backtrack(m, x, fx, m.gradient(x), config.radius, eta);
      if (w.value <= fx) {
        x = std::move(w.B);
        fx = w.value;
      }
      restart = true;
    }
    r.objective_trace.push_back(fx);

    // The true proxy costs another projection; only pay for it once the
    // gradient mapping at y says we are close.
    if (mapping < config.rtol || it == config.max_iterations) {
      r.stationarity = stationarity(m, x, eta, config.radius);
      if (r.stationarity < config.rtol) {
        r.converged = true;
        break;
      }
    }
    if (restart) {
      t = 1.0;
      y = x;
      grad_y = m.gradient(x);
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x + ((t - 1.0) / t_next) * (x - x_prev);
      t = t_next;
      grad_y = m.gradient(y);
    }
    fy = m.value(y);
  }
  r.B = std::move(x);
  r.objective = fx;
  return r;
}

double least_squares_radius(const Matrix& X, const Matrix& Y) {
  if (X.cols() != Y.cols()) throw DimensionError("least_squares_radius: X and Y differ in sample count");
  // B^T solves X^T B^T = Y^T in the minimum-norm least-squares sense.
  const Matrix bt = Eigen::CompleteOrthogonalDecomposition<Matrix>(X.transpose()).solve(Y.transpose());
  return nuclear_norm(bt);
}

std::vector<double> default_radii(const GroupedDataset& dataset) {
  if (dataset.n() < dataset.p())
    throw ConfigError("default radius needs n >= p (n = " + std::to_string(dataset.n()) + ", p = " +
                      std::to_string(dataset.p()) + "); choose it by cross-validation");
  std::vector<double> radii;
  radii.reserve(dataset.size());
  for (std::size_t g = 0; g < dataset.size(); ++g) {
    const double r = least_squares_radius(dataset[g].X, dataset[g].Y);
    radii.push_back(r > 0.0 ? r : 1e-12);
  }
  return radii;
}

RrrFitAllResult rrr_fit_all(const GroupedDataset& dataset, const RrrConfig& config, const Exec& exec) {
  std::vector<double> radii =
      config.radius > 0.0 ? std::vector<double>(dataset.size(), config.radius) : default_radii(dataset);
  return rrr_fit_all(dataset, radii, config, exec);
}

RrrFitAllResult rrr_fit_all(const GroupedDataset& dataset, const std::vector<double>& radii, const RrrConfig& config,
                            const Exec& exec) {
  RrrFitAllResult out;
  out.radii = radii;
  out.groups = exec.parallel() ? kernels::omp::rrr_groups(dataset, radii, config, exec.threads)
                               : kernels::serial::rrr_groups(dataset, radii, config);
  out.estimates.reserve(out.groups.size());
  for (const RrrResult& r : out.groups) out.estimates.push_back(r.B);
  return out;
}

}  // namespace csc
