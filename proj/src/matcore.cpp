#include "csc/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <lapacke.h>

namespace csc {

namespace {

constexpr double kSumTolerance = 1e-10;
constexpr int kMaxBisections = 200;

double clip(double x, double cap) { return std::min(std::max(x, 0.0), cap); }

double shifted_sum(const Vector& v, double theta, double cap) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += clip(v[i] - theta, cap);
  return s;
}

Vector shifted_clip(const Vector& v, double theta, double cap) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = clip(v[i] - theta, cap);
  return out;
}

// Solve the shift exactly assuming the partition (zero / free / capped)
// observed at theta is the final one. Returns theta itself when the
// partition is not self-consistent.
double refine_shift(const Vector& v, double theta, double budget, double cap) {
  double free_sum = 0.0;
  int free_count = 0;
  int capped = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v[i] - theta;
    if (x >= cap) {
      ++capped;
    } else if (x > 0.0) {
      free_sum += v[i];
      ++free_count;
    }
  }
  if (free_count == 0) return theta;
  const double capped_mass = capped > 0 ? capped * cap : 0.0;
  const double exact = (free_sum + capped_mass - budget) / free_count;
  if (!(exact >= 0.0)) return theta;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double before = v[i] - theta;
    const double after = v[i] - exact;
    const int cls_before = before >= cap ? 2 : (before > 0.0 ? 1 : 0);
    const int cls_after = after >= cap ? 2 : (after > 0.0 ? 1 : 0);
    if (cls_before != cls_after) return theta;
  }
  return exact;
}

void require_finite(const Matrix& m, const char* where) {
  if (!all_finite(m)) throw NumericalError(std::string(where) + ": non-finite matrix entry");
}

Matrix rebuild(const SvdResult& svd, const Vector& s) {
  return svd.left_vectors * s.asDiagonal() * svd.right_vectors.transpose();
}

}  // namespace

Matrix SvdResult::reconstruct() const { return rebuild(*this, singular_values); }

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

SvdResult thin_svd(const Matrix& m) {
  require_finite(m, "thin_svd");
  SvdResult out;
  if (m.size() == 0) {
    out.left_vectors = Matrix(m.rows(), 0);
    out.right_vectors = Matrix(m.cols(), 0);
    out.singular_values = Vector(0);
    return out;
  }
  // LAPACK dgesvd: several times faster than Eigen's Jacobi SVD at the
  // 20x20 sizes the projections run on. (dgesdd from the system OpenBLAS
  // returns wrong factors above ~50 columns, so it is avoided.)
  const lapack_int rows = static_cast<lapack_int>(m.rows());
  const lapack_int cols = static_cast<lapack_int>(m.cols());
  const lapack_int k = std::min(rows, cols);
  Matrix a = m;
  out.left_vectors.resize(rows, k);
  out.singular_values.resize(k);
  Matrix vt(k, cols);
  Vector superb(std::max<lapack_int>(k - 1, 1));
  const lapack_int info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', rows, cols, a.data(), rows,
                                         out.singular_values.data(), out.left_vectors.data(), rows, vt.data(), k,
                                         superb.data());
  if (info < 0) throw NumericalError("thin_svd: invalid argument " + std::to_string(-info) + " to dgesvd");
  if (info > 0) throw NumericalError("thin_svd: factorization did not converge");
  out.right_vectors = vt.transpose();
  return out;
}

Vector project_capped_simplex(const Vector& v, double budget, double cap) {
  if (!(budget > 0.0)) throw ConfigError("project_capped_simplex: budget must be positive");
  if (!(cap > 0.0)) throw ConfigError("project_capped_simplex: cap must be positive");
  if (v.size() == 0) return v;

  Vector clipped = shifted_clip(v, 0.0, cap);
  if (clipped.sum() <= budget) return clipped;

  double lo = 0.0;
  double hi = v.maxCoeff();
  double theta = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxBisections; ++it) {
    theta = 0.5 * (lo + hi);
    const double s = shifted_sum(v, theta, cap);
    if (std::abs(s - budget) <= kSumTolerance) break;
    if (s > budget) {
      lo = theta;
    } else {
      hi = theta;
    }
    if (hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
  }
  theta = refine_shift(v, theta, budget, cap);
  return shifted_clip(v, theta, cap);
}

Matrix project_to_dictionary_set(const Matrix& m, double tau) {
  if (!(tau > 0.0)) throw ConfigError("project_to_dictionary_set: tau must be positive");
  const SvdResult svd = thin_svd(m);
  const Vector& s = svd.singular_values;
  if (s.size() == 0 || (s.sum() <= tau && s[0] <= 1.0)) return m;
  return rebuild(svd, project_capped_simplex(s, tau, 1.0));
}

Matrix project_nuclear_ball(const Matrix& m, double radius) {
  if (!(radius > 0.0)) throw ConfigError("project_nuclear_ball: radius must be positive");
  const SvdResult svd = thin_svd(m);
  const Vector& s = svd.singular_values;
  if (s.size() == 0 || s.sum() <= radius) return m;
  return rebuild(svd, project_capped_simplex(s, radius));
}

double nuclear_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  require_finite(m, "nuclear_norm");
  return Eigen::JacobiSVD<Matrix>(m).singularValues().sum();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  require_finite(m, "spectral_norm");
  return Eigen::JacobiSVD<Matrix>(m).singularValues()[0];
}

int numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  require_finite(m, "numerical_rank");
  const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
  if (s[0] <= 0.0) return 0;
  const double cutoff = kRankRelativeThreshold * s[0];
  return static_cast<int>((s.array() > cutoff).count());
}

}  // namespace csc
