#include "csc/dataset.hpp"

#include <string>

namespace csc {

GroupedDataset::GroupedDataset(std::vector<Group> groups) : groups_(std::move(groups)) {
  if (groups_.empty()) return;
  p_ = groups_[0].X.rows();
  q_ = groups_[0].Y.rows();
  n_ = groups_[0].X.cols();
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const Group& grp = groups_[g];
    const std::string name = "group " + std::to_string(g);
    if (grp.X.rows() != p_ || grp.Y.rows() != q_)
      throw DimensionError(name + ": expected X with " + std::to_string(p_) + " rows and Y with " +
                           std::to_string(q_) + " rows, got " + std::to_string(grp.X.rows()) + " and " +
                           std::to_string(grp.Y.rows()));
    if (grp.X.cols() != n_ || grp.Y.cols() != n_)
      throw DimensionError(name + ": expected " + std::to_string(n_) + " samples in X and Y, got " +
                           std::to_string(grp.X.cols()) + " and " + std::to_string(grp.Y.cols()));
    if (!grp.X.allFinite() || !grp.Y.allFinite()) throw ValidationError(name + ": non-finite entry");
  }
}

Matrix select_columns(const Matrix& m, const std::vector<Eigen::Index>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= m.cols()) throw DimensionError("select_columns: column out of range");
    out.col(static_cast<Eigen::Index>(j)) = m.col(cols[j]);
  }
  return out;
}

GroupedDataset GroupedDataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<Group> out;
  out.reserve(indices.size());
  for (std::size_t g : indices) {
    if (g >= groups_.size()) throw ConfigError("subset: group index " + std::to_string(g) + " out of range");
    out.push_back(groups_[g]);
  }
  return GroupedDataset(std::move(out));
}

GroupedDataset GroupedDataset::columns(const std::vector<Eigen::Index>& keep) const {
  std::vector<Group> out;
  out.reserve(groups_.size());
  for (const Group& grp : groups_) out.push_back({select_columns(grp.X, keep), select_columns(grp.Y, keep)});
  return GroupedDataset(std::move(out));
}

GroupedDataset GroupedDataset::columns(const std::vector<std::vector<Eigen::Index>>& keep) const {
  if (keep.size() != groups_.size()) throw DimensionError("columns: one selection per group required");
  std::vector<Group> out;
  out.reserve(groups_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g)
    out.push_back({select_columns(groups_[g].X, keep[g]), select_columns(groups_[g].Y, keep[g])});
  return GroupedDataset(std::move(out));
}

}  // namespace csc
