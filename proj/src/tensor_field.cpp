#include "riesz/tensor_field.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace riesz {

SymTensorField::SymTensorField(const Grid& grid)
    : grid_(grid), entries_(sym_channel_count(grid.dim()), Eigen::VectorXd::Zero(grid.size())) {}

SymTensorField::SymTensorField(const Grid& grid, std::vector<Eigen::VectorXd> entries)
    : grid_(grid), entries_(std::move(entries)) {
  if (static_cast<int>(entries_.size()) != sym_channel_count(grid.dim()))
    throw std::invalid_argument("tensor field has wrong number of entries");
  for (const auto& e : entries_)
    if (e.size() != grid.size()) throw std::invalid_argument("tensor entry size does not match grid");
}

SmallMatrix SymTensorField::at(long cell) const {
  const int d = dim();
  SmallMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = entry(i, j)[cell];
  return m;
}

GridFunction SymTensorField::trace() const {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(grid_.size());
  for (int i = 0; i < dim(); ++i) t += entry(i, i);
  return GridFunction(grid_, std::move(t));
}

double SymTensorField::max_abs() const {
  double m = 0.0;
  for (const auto& e : entries_)
    if (e.size()) m = std::max(m, e.cwiseAbs().maxCoeff());
  return m;
}

Eigen::VectorXd SymTensorField::min_eigenvalues() const {
  Eigen::VectorXd out(grid_.size());
  if (dim() == 1) return entries_[0];
  Eigen::SelfAdjointEigenSolver<SmallMatrix> es;
  for (long c = 0; c < grid_.size(); ++c) {
    es.compute(at(c), Eigen::EigenvaluesOnly);
    out[c] = es.eigenvalues()[0];
  }
  return out;
}

SymTensorField SymTensorField::scaled(double s) const {
  auto e = entries_;
  for (auto& v : e) v *= s;
  return SymTensorField(grid_, std::move(e));
}

SymTensorField SymTensorField::plus(const SymTensorField& other) const {
  if (!grid_.same_layout(other.grid_)) throw std::invalid_argument("tensor fields live on different grids");
  auto e = entries_;
  for (size_t k = 0; k < e.size(); ++k) e[k] += other.entries_[k];
  return SymTensorField(grid_, std::move(e));
}

std::vector<GridChannel> SymTensorField::channels(const std::string& prefix) const {
  std::vector<GridChannel> out;
  for (int i = 0; i < dim(); ++i)
    for (int j = i; j < dim(); ++j)
      out.push_back({prefix + std::to_string(i) + std::to_string(j), entry(i, j)});
  return out;
}

}  // namespace riesz
