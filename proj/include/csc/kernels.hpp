#pragma once

// Per-group kernels. Each kernel has a serial reference version and an
// OpenMP version with the same contract; the modules dispatch on Exec.

#include "csc/dataset.hpp"
#include "csc/dictionary.hpp"
#include "csc/encoder.hpp"

#include <vector>

namespace csc {

struct RrrConfig;
struct RrrResult;

namespace kernels {

/// Smooth part of the CSC objective, (1/G) sum_g (1/n)||Y - B_g X||_F^2,
/// and its gradient with respect to each D_k.
struct SmoothTerms {
  double value = 0.0;
  std::vector<Matrix> gradient;
};

namespace serial {

std::vector<EncodeResult> encode_groups(const Dictionary& dictionary, const GroupedDataset& dataset, double lambda,
                                        const EncoderOptions& options, const GroupCoefficients* warm_start);
double smooth_value(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                    const GroupedDataset& dataset);
SmoothTerms smooth_gradient(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                            const GroupedDataset& dataset);
std::vector<RrrResult> rrr_groups(const GroupedDataset& dataset, const std::vector<double>& radii,
                                  const RrrConfig& config);

}  // namespace serial

namespace omp {

std::vector<EncodeResult> encode_groups(const Dictionary& dictionary, const GroupedDataset& dataset, double lambda,
                                        const EncoderOptions& options, const GroupCoefficients* warm_start,
                                        int threads);
/// ordered == true sums the per-group terms in group order after the
/// parallel loop, matching the serial kernel bitwise.
double smooth_value(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                    const GroupedDataset& dataset, int threads, bool ordered);
SmoothTerms smooth_gradient(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                            const GroupedDataset& dataset, int threads, bool ordered);
std::vector<RrrResult> rrr_groups(const GroupedDataset& dataset, const std::vector<double>& radii,
                                  const RrrConfig& config, int threads);

}  // namespace omp

}  // namespace kernels
}  // namespace csc
