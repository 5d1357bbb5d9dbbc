#include "csc/baseline.hpp"
#include "kernels_detail.hpp"

#include <omp.h>

#include <exception>

namespace csc::kernels::omp {

namespace {

// Exceptions may not cross an OpenMP region; the first one is captured
// and rethrown after the loop.
class FirstError {
 public:
  template <class F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(csc_first_error)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

long long count(const GroupedDataset& dataset) { return static_cast<long long>(dataset.size()); }

}  // namespace

std::vector<EncodeResult> encode_groups(const Dictionary& dictionary, const GroupedDataset& dataset, double lambda,
                                        const EncoderOptions& options, const GroupCoefficients* warm_start,
                                        int threads) {
  std::vector<EncodeResult> out(dataset.size());
  FirstError error;
#pragma omp parallel for num_threads(threads) schedule(dynamic)
  for (long long g = 0; g < count(dataset); ++g) {
    error.run([&] {
      const auto i = static_cast<std::size_t>(g);
      out[i] = detail::encode_group(dictionary, dataset, i, lambda, options, warm_start);
    });
  }
  error.rethrow();
  return out;
}

double smooth_value(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                    const GroupedDataset& dataset, int threads, bool ordered) {
  detail::check_coefficients(dictionary, coefficients, dataset);
  if (dataset.empty()) return 0.0;
  FirstError error;
  double total = 0.0;
  if (ordered) {
    std::vector<double> energy(dataset.size());
#pragma omp parallel for num_threads(threads) schedule(static)
    for (long long g = 0; g < count(dataset); ++g) {
      error.run([&] {
        const auto i = static_cast<std::size_t>(g);
        energy[i] = detail::group_residual_energy(dictionary, coefficients[i], dataset[i]);
      });
    }
    error.rethrow();
    for (double e : energy) total += e;
  } else {
#pragma omp parallel for num_threads(threads) schedule(static) reduction(+ : total)
    for (long long g = 0; g < count(dataset); ++g) {
      error.run([&] {
        const auto i = static_cast<std::size_t>(g);
        total += detail::group_residual_energy(dictionary, coefficients[i], dataset[i]);
      });
    }
    error.rethrow();
  }
  return total / static_cast<double>(dataset.size());
}

SmoothTerms smooth_gradient(const Dictionary& dictionary, const GroupCoefficients& coefficients,
                            const GroupedDataset& dataset, int threads, bool ordered) {
  detail::check_coefficients(dictionary, coefficients, dataset);
  SmoothTerms out;
  const Matrix zero = Matrix::Zero(dictionary.q(), dictionary.p());
  out.gradient.assign(dictionary.K(), zero);
  if (dataset.empty()) return out;
  const double G = static_cast<double>(dataset.size());
  FirstError error;

  if (ordered) {
    std::vector<Matrix> cross(dataset.size());
    std::vector<double> energy(dataset.size());
#pragma omp parallel for num_threads(threads) schedule(static)
    for (long long g = 0; g < count(dataset); ++g) {
      error.run([&] {
        const auto i = static_cast<std::size_t>(g);
        cross[i].resize(dataset.q(), dataset.p());
        energy[i] = detail::group_cross_product(dictionary, coefficients[i], dataset[i], cross[i]);
      });
    }
    error.rethrow();
    double total = 0.0;
    for (std::size_t g = 0; g < dataset.size(); ++g) {
      total += energy[g];
      const double scale = -2.0 / (G * static_cast<double>(dataset[g].X.cols()));
      detail::accumulate_gradient(coefficients[g], cross[g], scale, out.gradient);
    }
    out.value = total / G;
    return out;
  }

  double total = 0.0;
#pragma omp parallel num_threads(threads)
  {
    std::vector<Matrix> local(dictionary.K(), zero);
    Matrix cross(dataset.q(), dataset.p());
    double local_total = 0.0;
#pragma omp for schedule(static) nowait
    for (long long g = 0; g < count(dataset); ++g) {
      error.run([&] {
        const auto i = static_cast<std::size_t>(g);
        local_total += detail::group_cross_product(dictionary, coefficients[i], dataset[i], cross);
        const double scale = -2.0 / (G * static_cast<double>(dataset[i].X.cols()));
        detail::accumulate_gradient(coefficients[i], cross, scale, local);
      });
    }
#pragma omp critical(csc_gradient_merge)
    {
      total += local_total;
      for (std::size_t k = 0; k < local.size(); ++k) out.gradient[k] += local[k];
    }
  }
  error.rethrow();
  out.value = total / G;
  return out;
}

std::vector<RrrResult> rrr_groups(const GroupedDataset& dataset, const std::vector<double>& radii,
                                  const RrrConfig& config, int threads) {
  if (radii.size() != dataset.size()) throw DimensionError("rrr_groups: one radius per group required");
  std::vector<RrrResult> out(dataset.size());
  FirstError error;
#pragma omp parallel for num_threads(threads) schedule(dynamic)
  for (long long g = 0; g < count(dataset); ++g) {
    error.run([&] {
      const auto i = static_cast<std::size_t>(g);
      RrrConfig c = config;
      c.radius = radii[i];
      out[i] = detail::rrr_group(dataset, i, c);
    });
  }
  error.rethrow();
  return out;
}

}  // namespace csc::kernels::omp
