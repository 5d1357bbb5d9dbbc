#pragma once

#include "csc/types.hpp"

#include <cstddef>
#include <vector>

namespace csc {

/// One group's samples, arranged as columns: X is p x n, Y is q x n.
struct Group {
  Matrix X;
  Matrix Y;
};

/// G groups sharing p, q and n.
class GroupedDataset {
 public:
  GroupedDataset() = default;
  /// Validates shapes; throws DimensionError naming the first bad group.
  explicit GroupedDataset(std::vector<Group> groups);

  std::size_t size() const { return groups_.size(); }
  bool empty() const { return groups_.empty(); }
  Eigen::Index p() const { return p_; }
  Eigen::Index q() const { return q_; }
  Eigen::Index n() const { return n_; }

  const Group& operator[](std::size_t g) const { return groups_[g]; }
  const std::vector<Group>& groups() const { return groups_; }

  /// Groups at the given indices, in the given order.
  GroupedDataset subset(const std::vector<std::size_t>& indices) const;
  /// Same columns kept in every group.
  GroupedDataset columns(const std::vector<Eigen::Index>& keep) const;
  /// Per-group column selection (all selections must have equal length).
  GroupedDataset columns(const std::vector<std::vector<Eigen::Index>>& keep) const;

 private:
  std::vector<Group> groups_;
  Eigen::Index p_ = 0;
  Eigen::Index q_ = 0;
  Eigen::Index n_ = 0;
};

Matrix select_columns(const Matrix& m, const std::vector<Eigen::Index>& cols);

}  // namespace csc
