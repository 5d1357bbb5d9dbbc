#pragma once

#include "csc/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace csc {

/// Seeded random stream with a fixed, documented algorithm so the same
/// seed yields the same data on any standard library:
///   - engine: std::mt19937_64 (its output sequence is fixed by the standard)
///   - uniform(): top 53 bits of one engine draw, scaled to [0, 1)
///   - normal(): Box-Muller on two uniforms, both variates used in turn
///   - index(n): rejection sampling on raw engine draws
///
/// std::*_distribution are avoided because their algorithms are
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double normal();
  std::size_t index(std::size_t n);

  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);
  /// Normalized standard normal draw (uniform on the sphere).
  Vector unit_vector(Eigen::Index dim);
  /// k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);
  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace csc
