#include "csc/baseline.hpp"
#include "kernels_detail.hpp"

namespace csc::kernels {

namespace detail {

EncodeResult encode_group(const Dictionary& dictionary, const GroupedDataset& dataset, std::size_t g, double lambda,
                          const EncoderOptions& options, const GroupCoefficients* warm_start) {
  const FeatureBundle bundle = build_features(dictionary, dataset[g].X, dataset[g].Y, g);
  return lasso_encode(bundle, lambda, options, warm_start != nullptr ? (*warm_start)[g] : Vector());
}

double group_residual_energy(const Dictionary& dictionary, const Vector& alpha, const Group& group) {
  const Matrix residual = group.Y - compose_B(dictionary, alpha) * group.X;
  return residual.squaredNorm() / static_cast<double>(group.X.cols());
}

// (1/n)||R||^2 and R X^T for one group.
double group_cross_product(const Dictionary& dictionary, const Vector& alpha, const Group& group, Matrix& cross) {
  Matrix residual = group.Y;
  residual.noalias() -= compose_B(dictionary, alpha) * group.X;
  cross.noalias() = residual * group.X.transpose();
  return residual.squaredNorm() / static_cast<double>(group.X.cols());
}

// Adds group g's share to the gradient; shared by both kernels so the
// ordered parallel reduction repeats the serial arithmetic exactly.
void accumulate_gradient(const Vector& alpha, const Matrix& cross, double scale, std::vector<Matrix>& gradient) {
  for (std::size_t k = 0; k < gradient.size(); ++k) {
    const double a = alpha[static_cast<Eigen::Index>(k)];
    if (a != 0.0) gradient[k].noalias() += (scale * a) * cross;
  }
}

void check_coefficients(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                        const GroupedDataset& dataset) {
  if (coefficients.size() != dataset.size())
    throw DimensionError("coefficients cover " + std::to_string(coefficients.size()) + " groups, dataset has " +
                         std::to_string(dataset.size()));
  for (std::size_t g = 0; g < coefficients.size(); ++g)
    if (static_cast<std::size_t>(coefficients[g].size()) != dictionary.K())
      throw DimensionError("group " + std::to_string(g) + ": coefficient vector length " +
                           std::to_string(coefficients[g].size()) + " != K = " + std::to_string(dictionary.K()));
  if (!dataset.empty() && (dictionary.p() != dataset.p() || dictionary.q() != dataset.q()))
    throw DimensionError("dictionary entries are " + std::to_string(dictionary.q()) + "x" +
                         std::to_string(dictionary.p()) + " but data needs " + std::to_string(dataset.q()) + "x" +
                         std::to_string(dataset.p()));
}

RrrResult rrr_group(const GroupedDataset& dataset, std::size_t g, const RrrConfig& config) {
  try {
    return rrr_fit(dataset[g].X, dataset[g].Y, config);
  } catch (const NumericalError& e) {
    throw NumericalError("group " + std::to_string(g) + ": " + e.what());
  }
}

}  // namespace detail

namespace serial {

std::vector<EncodeResult> encode_groups(const Dictionary& dictionary, const GroupedDataset& dataset, double lambda,
                                        const EncoderOptions& options, const GroupCoefficients* warm_start) {
  std::vector<EncodeResult> out;
  out.reserve(dataset.size());
  for (std::size_t g = 0; g < dataset.size(); ++g)
    out.push_back(detail::encode_group(dictionary, dataset, g, lambda, options, warm_start));
  return out;
}

double smooth_value(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                    const GroupedDataset& dataset) {
  detail::check_coefficients(dictionary, coefficients, dataset);
  double total = 0.0;
  for (std::size_t g = 0; g < dataset.size(); ++g)
    total += detail::group_residual_energy(dictionary, coefficients[g], dataset[g]);
  return dataset.empty() ? 0.0 : total / static_cast<double>(dataset.size());
}

SmoothTerms smooth_gradient(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                            const GroupedDataset& dataset) {
  detail::check_coefficients(dictionary, coefficients, dataset);
  SmoothTerms out;
  out.gradient.assign(dictionary.K(), Matrix::Zero(dictionary.q(), dictionary.p()));
  if (dataset.empty()) return out;
  const double G = static_cast<double>(dataset.size());
  Matrix cross(dataset.q(), dataset.p());
  double total = 0.0;
  for (std::size_t g = 0; g < dataset.size(); ++g) {
    total += detail::group_cross_product(dictionary, coefficients[g], dataset[g], cross);
    const double scale = -2.0 / (G * static_cast<double>(dataset[g].X.cols()));
    detail::accumulate_gradient(coefficients[g], cross, scale, out.gradient);
  }
  out.value = total / G;
  return out;
}

std::vector<RrrResult> rrr_groups(const GroupedDataset& dataset, const std::vector<double>& radii,
                                  const RrrConfig& config) {
  if (radii.size() != dataset.size()) throw DimensionError("rrr_groups: one radius per group required");
  std::vector<RrrResult> out;
  out.reserve(dataset.size());
  for (std::size_t g = 0; g < dataset.size(); ++g) {
    RrrConfig c = config;
    c.radius = radii[g];
    out.push_back(detail::rrr_group(dataset, g, c));
  }
  return out;
}

}  // namespace serial
}  // namespace csc::kernels
