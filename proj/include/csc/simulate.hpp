#pragma once

#include "csc/dataset.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace csc {

enum class Scenario { structured, unstructured, structured_same_design };

std::string to_string(Scenario s);
/// Throws ConfigError for unknown names.
Scenario parse_scenario(const std::string& name);

struct SimParams {
  Scenario scenario = Scenario::structured;
  Eigen::Index p = 20;
  /// Response dimension; 0 means q = p.
  Eigen::Index q = 0;
  Eigen::Index n_train = 40;
  Eigen::Index n_test = 1000;
  std::size_t G = 50;
  std::size_t true_dictionary_size = 30;
  std::size_t true_sparsity = 3;
  Eigen::Index true_rank = 3;
  double noise_sigma = 0.1;
  std::uint64_t rng_seed = 0;

  Eigen::Index response_dim() const { return q > 0 ? q : p; }
  void validate() const;
};

struct GroundTruth {
  std::vector<Matrix> B_star;
  /// Structured scenarios only.
  std::vector<Matrix> true_dictionary;
  std::vector<std::vector<std::size_t>> true_supports;
  std::vector<Vector> true_coefficients;
};

struct SimulatedData {
  GroupedDataset train;
  GroupedDataset test;
  GroundTruth truth;
};

/// Y = B* X + sigma E with X, E standard normal. Draw order from one
/// Rng(seed) stream: ground truth, then per group (train X, train noise),
/// then per group (test X, test noise). With a shared design the train and
/// test X are drawn once before the groups.
SimulatedData gen_dataset(const SimParams& params);

}  // namespace csc
