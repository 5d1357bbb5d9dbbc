#pragma once

#include "csc/types.hpp"

#include <limits>

namespace csc {

/// Thin singular value decomposition M = U diag(s) V^T with k = min(rows, cols).
struct SvdResult {
  Matrix left_vectors;    // rows x k
  Vector singular_values; // nonincreasing, >= 0
  Matrix right_vectors;   // cols x k

  Matrix reconstruct() const;
};

/// Relative threshold used whenever a numerical rank is reported.
inline constexpr double kRankRelativeThreshold = 1e-6;

double soft_threshold(double v, double t);

/// Throws NumericalError on non-finite input or when the factorization
/// does not converge.
SvdResult thin_svd(const Matrix& m);

/// Euclidean projection of v onto {x : 0 <= x_i <= cap, sum x_i <= budget}.
/// cap may be +infinity (plain simplex-ball projection).
///
/// The sum constraint is enforced by bisection on the shift theta in
/// x_i = clip(v_i - theta, 0, cap), followed by an exact solve of theta on
/// the partition the bisection settles on.
Vector project_capped_simplex(const Vector& v, double budget,
                              double cap = std::numeric_limits<double>::infinity());

/// Projection onto {D : ||D||_* <= tau, ||D||_2 <= 1}. Feasible input is
/// returned unchanged.
Matrix project_to_dictionary_set(const Matrix& m, double tau);

/// Projection onto the nuclear-norm ball of the given radius.
Matrix project_nuclear_ball(const Matrix& m, double radius);

double nuclear_norm(const Matrix& m);
double spectral_norm(const Matrix& m);

/// Count of singular values above kRankRelativeThreshold * s_1; zero for
/// the zero matrix.
int numerical_rank(const Matrix& m);

bool all_finite(const Matrix& m);

}  // namespace csc
