#pragma once

#include "csc/baseline.hpp"
#include "csc/kernels.hpp"

namespace csc::kernels::detail {

EncodeResult encode_group(const Dictionary& dictionary, const GroupedDataset& dataset, std::size_t g, double lambda,
                          const EncoderOptions& options, const GroupCoefficients* warm_start);
double group_residual_energy(const Dictionary& dictionary, const Vector& alpha, const Group& group);
double group_cross_product(const Dictionary& dictionary, const Vector& alpha, const Group& group, Matrix& cross);
void accumulate_gradient(const Vector& alpha, const Matrix& cross, double scale, std::vector<Matrix>& gradient);
RrrResult rrr_group(const GroupedDataset& dataset, std::size_t g, const RrrConfig& config);
void check_coefficients(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                        const GroupedDataset& dataset);

}  // namespace csc::kernels::detail
