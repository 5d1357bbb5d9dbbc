#pragma once

#include "csc/types.hpp"

#include <vector>

namespace csc {

/// Feasibility slack for stored dictionaries.
inline constexpr double kDictionaryFeasibilitySlack = 1e-6;

/// K shared q x p codewords, each inside {||D||_* <= tau, ||D||_2 <= 1}.
struct Dictionary {
  std::vector<Matrix> entries;
  double tau = 1.0;

  std::size_t K() const { return entries.size(); }
  Eigen::Index q() const { return entries.empty() ? 0 : entries.front().rows(); }
  Eigen::Index p() const { return entries.empty() ? 0 : entries.front().cols(); }

  /// Throws DimensionError when entries disagree in shape.
  void check_shapes() const;
  /// True when every entry satisfies both norm constraints within slack.
  bool feasible(double slack = kDictionaryFeasibilitySlack) const;
};

/// Per-group coefficient vectors alpha^(g), each of length K.
struct GroupCoefficients {
  std::vector<Vector> alphas;

  std::size_t size() const { return alphas.size(); }
  const Vector& operator[](std::size_t g) const { return alphas[g]; }
  Vector& operator[](std::size_t g) { return alphas[g]; }

  static GroupCoefficients zeros(std::size_t groups, std::size_t K);
  /// G x K, one row per group.
  Matrix as_matrix() const;
  static GroupCoefficients from_matrix(const Matrix& rows);
};

/// B = sum_k alpha_k D_k.
Matrix compose_B(const Dictionary& dictionary, const Vector& alpha);

}  // namespace csc
