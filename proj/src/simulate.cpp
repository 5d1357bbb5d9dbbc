#include "csc/simulate.hpp"

#include "csc/rng.hpp"

namespace csc {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::structured: return "structured";
    case Scenario::unstructured: return "unstructured";
    case Scenario::structured_same_design: return "structured_same_design";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& name) {
  if (name == "structured") return Scenario::structured;
  if (name == "unstructured") return Scenario::unstructured;
  if (name == "structured_same_design") return Scenario::structured_same_design;
  throw ConfigError("unknown scenario '" + name + "'");
}

void SimParams::validate() const {
  if (p < 1 || response_dim() < 1) throw ConfigError("p and q must be positive");
  if (n_train < 1 || n_test < 1) throw ConfigError("sample counts must be positive");
  if (G < 1) throw ConfigError("G must be positive");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be nonnegative");
  if (scenario == Scenario::unstructured) {
    if (true_rank < 1 || true_rank > std::min(p, response_dim()))
      throw ConfigError("true rank must lie in [1, min(p, q)]");
  } else {
    if (true_dictionary_size < 1 || true_sparsity < 1) throw ConfigError("true dictionary size and sparsity must be positive");
    if (true_sparsity > true_dictionary_size) throw ConfigError("true sparsity exceeds the true dictionary size");
  }
}

namespace {

Group draw_group(Rng& rng, const Matrix& B, const Matrix* shared_x, Eigen::Index n, double sigma) {
  Group g;
  g.X = shared_x != nullptr ? *shared_x : rng.normal_matrix(B.cols(), n);
  const Matrix noise = rng.normal_matrix(B.rows(), n);
  g.Y = B * g.X + sigma * noise;
  return g;
}

}  // namespace

SimulatedData gen_dataset(const SimParams& params) {
  params.validate();
  const Eigen::Index p = params.p;
  const Eigen::Index q = params.response_dim();
  Rng rng(params.rng_seed);
  SimulatedData out;
  GroundTruth& truth = out.truth;

  if (params.scenario == Scenario::unstructured) {
    for (std::size_t g = 0; g < params.G; ++g) {
      const Matrix a = rng.normal_matrix(q, params.true_rank);
      const Matrix c = rng.normal_matrix(p, params.true_rank);
      truth.B_star.push_back(a * c.transpose());
    }
  } else {
    for (std::size_t j = 0; j < params.true_dictionary_size; ++j) {
      const Vector u = rng.unit_vector(q);
      const Vector v = rng.unit_vector(p);
      truth.true_dictionary.push_back(u * v.transpose());
    }
    for (std::size_t g = 0; g < params.G; ++g) {
      std::vector<std::size_t> support = rng.sample_without_replacement(params.true_dictionary_size, params.true_sparsity);
      Vector coefs(static_cast<Eigen::Index>(params.true_sparsity));
      for (Eigen::Index i = 0; i < coefs.size(); ++i) coefs[i] = rng.normal();
      Matrix b = Matrix::Zero(q, p);
      for (std::size_t i = 0; i < support.size(); ++i)
        b += coefs[static_cast<Eigen::Index>(i)] * truth.true_dictionary[support[i]];
      truth.B_star.push_back(std::move(b));
      truth.true_supports.push_back(std::move(support));
      truth.true_coefficients.push_back(std::move(coefs));
    }
  }

  std::optional<Matrix> shared_train;
  std::optional<Matrix> shared_test;
  if (params.scenario == Scenario::structured_same_design) {
    shared_train = rng.normal_matrix(p, params.n_train);
    shared_test = rng.normal_matrix(p, params.n_test);
  }
  std::vector<Group> train;
  std::vector<Group> test;
  for (std::size_t g = 0; g < params.G; ++g)
    train.push_back(draw_group(rng, truth.B_star[g], shared_train ? &*shared_train : nullptr, params.n_train,
                               params.noise_sigma));
  for (std::size_t g = 0; g < params.G; ++g)
    test.push_back(draw_group(rng, truth.B_star[g], shared_test ? &*shared_test : nullptr, params.n_test,
                              params.noise_sigma));
  out.train = GroupedDataset(std::move(train));
  out.test = GroupedDataset(std::move(test));
  return out;
}

}  // namespace csc
