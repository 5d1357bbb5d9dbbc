#include "csc/dictionary.hpp"

#include "csc/matcore.hpp"

#include <string>

namespace csc {

void Dictionary::check_shapes() const {
  for (std::size_t k = 1; k < entries.size(); ++k)
    if (entries[k].rows() != q() || entries[k].cols() != p())
      throw DimensionError("dictionary entry " + std::to_string(k) + " is " + std::to_string(entries[k].rows()) + "x" +
                           std::to_string(entries[k].cols()) + ", expected " + std::to_string(q()) + "x" +
                           std::to_string(p()));
}

bool Dictionary::feasible(double slack) const {
  for (const Matrix& d : entries) {
    const Vector s = thin_svd(d).singular_values;
    if (s.size() == 0) continue;
    if (s.sum() > tau + slack || s[0] > 1.0 + slack) return false;
  }
  return true;
}

GroupCoefficients GroupCoefficients::zeros(std::size_t groups, std::size_t K) {
  GroupCoefficients c;
  c.alphas.assign(groups, Vector::Zero(static_cast<Eigen::Index>(K)));
  return c;
}

Matrix GroupCoefficients::as_matrix() const {
  if (alphas.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(alphas.size()), alphas.front().size());
  for (std::size_t g = 0; g < alphas.size(); ++g) {
    if (alphas[g].size() != m.cols()) throw DimensionError("coefficient vectors differ in length");
    m.row(static_cast<Eigen::Index>(g)) = alphas[g].transpose();
  }
  return m;
}

GroupCoefficients GroupCoefficients::from_matrix(const Matrix& rows) {
  GroupCoefficients c;
  c.alphas.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index g = 0; g < rows.rows(); ++g) c.alphas.emplace_back(rows.row(g).transpose());
  return c;
}

Matrix compose_B(const Dictionary& dictionary, const Vector& alpha) {
  if (static_cast<std::size_t>(alpha.size()) != dictionary.K())
    throw DimensionError("compose_B: " + std::to_string(alpha.size()) + " coefficients for " +
                         std::to_string(dictionary.K()) + " dictionary entries");
  Matrix b = Matrix::Zero(dictionary.q(), dictionary.p());
  for (std::size_t k = 0; k < dictionary.K(); ++k) {
    const double a = alpha[static_cast<Eigen::Index>(k)];
    if (a != 0.0) b.noalias() += a * dictionary.entries[k];
  }
  return b;
}

}  // namespace csc
