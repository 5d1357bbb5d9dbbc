#include "csc/matcore.hpp"
#include "csc/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace csc;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("soft_threshold") {
  CHECK(soft_threshold(2.0, 1.0) == 1.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-3.0, 0.5) == -2.5);
  CHECK(soft_threshold(1.0, 1.0) == 0.0);
  CHECK(soft_threshold(0.7, 0.0) == 0.7);
}

TEST_CASE("thin_svd contract") {
  SUBCASE("identity") {
    const SvdResult s = thin_svd(Matrix::Identity(3, 3));
    CHECK((s.singular_values - Vector::Ones(3)).norm() < 1e-14);
  }
  SUBCASE("rank-one outer product") {
    Vector u = vec({2.0, 0.0, 0.0});
    Vector v = vec({0.0, 3.0, 0.0, 0.0});
    const SvdResult s = thin_svd(u * v.transpose());
    REQUIRE(s.singular_values.size() == 3);
    CHECK(s.singular_values[0] == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(s.singular_values[1] == doctest::Approx(0.0));
  }
  SUBCASE("random shapes reconstruct, sorted, orthonormal") {
    Rng rng(11);
    for (auto [r, c] : {std::pair{4, 3}, {3, 4}, {1, 5}, {7, 7}, {80, 70}}) {
      const Matrix m = rng.normal_matrix(r, c);
      const SvdResult s = thin_svd(m);
      const Eigen::Index k = std::min(r, c);
      REQUIRE(s.singular_values.size() == k);
      CHECK((s.reconstruct() - m).norm() / m.norm() < 1e-10);
      for (Eigen::Index i = 1; i < k; ++i) CHECK(s.singular_values[i] <= s.singular_values[i - 1]);
      CHECK(s.singular_values.minCoeff() >= 0.0);
      CHECK((s.left_vectors.transpose() * s.left_vectors - Matrix::Identity(k, k)).norm() < 1e-8);
      CHECK((s.right_vectors.transpose() * s.right_vectors - Matrix::Identity(k, k)).norm() < 1e-8);
    }
  }
  SUBCASE("non-finite input is a numerical error") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(thin_svd(m), NumericalError);
  }
}

TEST_CASE("project_capped_simplex examples") {
  CHECK((project_capped_simplex(vec({0.3, 0.2}), 1.0, 1.0) - vec({0.3, 0.2})).norm() == 0.0);
  CHECK((project_capped_simplex(vec({2.0, 2.0}), 1.0, 1.0) - vec({0.5, 0.5})).norm() < 1e-12);
  CHECK((project_capped_simplex(vec({1.5, -0.2, 0.1}), 2.0, 1.0) - vec({1.0, 0.0, 0.1})).norm() < 1e-15);
  CHECK_THROWS_AS(project_capped_simplex(vec({1.0}), 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(project_capped_simplex(vec({1.0}), 1.0, -1.0), ConfigError);
}

TEST_CASE("project_capped_simplex: (2,2) against a fine grid search") {
  // Feasible set is {0<=x<=1, x1+x2<=1}; scan it directly.
  double best = 1e300, bx = 0, by = 0;
  const int steps = 2000;
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; i + j <= steps; ++j) {
      const double x = double(i) / steps, y = double(j) / steps;
      const double d = (2 - x) * (2 - x) + (2 - y) * (2 - y);
      if (d < best) {
        best = d;
        bx = x;
        by = y;
      }
    }
  const Vector p = project_capped_simplex(vec({2.0, 2.0}), 1.0, 1.0);
  CHECK(std::abs(p[0] - bx) <= 1.0 / steps);
  CHECK(std::abs(p[1] - by) <= 1.0 / steps);
}

TEST_CASE("project_capped_simplex matches the enumeration QP") {
  Rng rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(6));
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = 3.0 * rng.normal();
    const double budget = 0.05 + 3.0 * rng.uniform();
    const double cap = trial % 3 == 0 ? std::numeric_limits<double>::infinity() : 0.05 + 2.0 * rng.uniform();
    const Vector got = project_capped_simplex(v, budget, cap);
    worst = std::max(worst, (got - oracle::capped_simplex_qp(v, budget, cap)).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("project_capped_simplex properties") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(12));
    Vector v(d), w(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      v[i] = 2.0 * rng.normal();
      w[i] = 2.0 * rng.normal();
    }
    const double budget = 0.1 + 2.0 * rng.uniform();
    const double cap = 0.1 + rng.uniform();
    const Vector pv = project_capped_simplex(v, budget, cap);
    const Vector pw = project_capped_simplex(w, budget, cap);
    // feasible
    CHECK(pv.minCoeff() >= -1e-12);
    CHECK(pv.maxCoeff() <= cap + 1e-12);
    CHECK(pv.sum() <= budget + 1e-9);
    // idempotent
    CHECK((project_capped_simplex(pv, budget, cap) - pv).norm() <= 1e-9);
    // nonexpansive
    CHECK((pv - pw).norm() <= (v - w).norm() + 1e-9);
  }
}

TEST_CASE("nuclear-ball and dictionary-set projections match the spectral QP oracle") {
  Rng rng(9);
  double worst_ball = 0.0, worst_dict = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng.index(5));
    const Eigen::Index c = 1 + static_cast<Eigen::Index>(rng.index(5));
    const Matrix m = 1.5 * rng.normal_matrix(r, c);
    const double radius = 0.1 + 3.0 * rng.uniform();
    const Matrix ball = project_nuclear_ball(m, radius);
    worst_ball = std::max(worst_ball,
                          (ball - oracle::spectral_projection(m, radius, std::numeric_limits<double>::infinity()))
                              .cwiseAbs()
                              .maxCoeff());
    CHECK(oracle::nuclear_ball_certificate_gap(m, ball, radius) <= 1e-9);
    const double tau = 0.2 + 1.5 * rng.uniform();
    const Matrix dict = project_to_dictionary_set(m, tau);
    worst_dict = std::max(worst_dict, (dict - oracle::spectral_projection(m, tau, 1.0)).cwiseAbs().maxCoeff());
  }
  CHECK(worst_ball <= 1e-9);
  CHECK(worst_dict <= 1e-9);
}

TEST_CASE("dictionary-set projection properties") {
  Rng rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const Matrix m = 2.0 * rng.normal_matrix(6, 4);
    const Matrix m2 = 2.0 * rng.normal_matrix(6, 4);
    const double tau = 0.3 + 0.7 * rng.uniform();
    const Matrix p = project_to_dictionary_set(m, tau);
    CHECK(nuclear_norm(p) <= tau + 1e-9);
    CHECK(spectral_norm(p) <= 1.0 + 1e-9);
    CHECK((project_to_dictionary_set(p, tau) - p).norm() <= 1e-9);
    CHECK((p - project_to_dictionary_set(m2, tau)).norm() <= (m - m2).norm() + 1e-9);

    // Unitary invariance: P(U M V) = U P(M) V.
    const Matrix U = thin_svd(rng.normal_matrix(6, 6)).left_vectors;
    const Matrix V = thin_svd(rng.normal_matrix(4, 4)).left_vectors;
    CHECK((project_to_dictionary_set(U * m * V, tau) - U * p * V).norm() <= 1e-9);
  }
  SUBCASE("feasible input returned unchanged") {
    const Matrix small = 0.01 * rng.normal_matrix(3, 3);
    CHECK(project_to_dictionary_set(small, 1.0) == small);
    CHECK(project_nuclear_ball(small, 1.0) == small);
  }
  CHECK_THROWS_AS(project_to_dictionary_set(Matrix::Identity(2, 2), 0.0), ConfigError);
  CHECK_THROWS_AS(project_nuclear_ball(Matrix::Identity(2, 2), -1.0), ConfigError);
}

TEST_CASE("norms and numerical rank") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 3.0;
  d(1, 1) = -4.0;
  CHECK(nuclear_norm(d) == doctest::Approx(7.0));
  CHECK(spectral_norm(d) == doctest::Approx(4.0));
  CHECK(numerical_rank(d) == 2);
  CHECK(numerical_rank(Matrix::Zero(2, 3)) == 0);
  d(2, 2) = 1e-9;  // below 1e-6 * s1
  CHECK(numerical_rank(d) == 2);
  CHECK(all_finite(d));
  d(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_FALSE(all_finite(d));
}
