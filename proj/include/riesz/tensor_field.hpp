#pragma once

#include "riesz/grid.hpp"
#include "riesz/grid_io.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace riesz {

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::AutoAlign, kMaxDim + 1, kMaxDim + 1>;

inline int sym_channel_count(int dim) { return dim * (dim + 1) / 2; }

// Channel index of entry (i, j) in upper-triangular row order:
// (0,0), (0,1), ..., (0,d-1), (1,1), ...
inline int sym_channel(int dim, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * dim - i * (i - 1) / 2 + (j - i);
}

// Symmetric d x d matrix per cell, one array per independent entry.
class SymTensorField {
 public:
  explicit SymTensorField(const Grid& grid);
  SymTensorField(const Grid& grid, std::vector<Eigen::VectorXd> entries);

  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  const Eigen::VectorXd& entry(int i, int j) const { return entries_[sym_channel(dim(), i, j)]; }
  Eigen::VectorXd& entry(int i, int j) { return entries_[sym_channel(dim(), i, j)]; }
  const std::vector<Eigen::VectorXd>& entries() const { return entries_; }

  SmallMatrix at(long cell) const;
  GridFunction trace() const;
  double max_abs() const;
  // Smallest eigenvalue at every cell.
  Eigen::VectorXd min_eigenvalues() const;

  SymTensorField scaled(double s) const;
  SymTensorField plus(const SymTensorField& other) const;

  std::vector<GridChannel> channels(const std::string& prefix = "S") const;

 private:
  Grid grid_;
  std::vector<Eigen::VectorXd> entries_;
};

}  // namespace riesz
