#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <vector>

namespace riesz {

inline constexpr int kMaxDim = 3;

using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::AutoAlign, kMaxDim, 1>;
using MultiIndex = std::array<long, kMaxDim>;

// Uniform cubic grid of N^d cells with spacing h. Cell i has center
// origin + (i + 1/2) h along each axis; values are stored row-major with the
// last axis fastest.
class Grid {
 public:
  Grid(int dim, long cells_per_axis, const Point& origin, double spacing,
       const std::array<bool, kMaxDim>& periodic);

  int dim() const { return dim_; }
  long cells_per_axis() const { return n_; }
  long size() const { return size_; }
  double spacing() const { return h_; }
  double cell_volume() const { return cell_volume_; }
  double extent() const { return h_ * static_cast<double>(n_); }
  double half_width() const { return 0.5 * extent(); }
  const Point& origin() const { return origin_; }
  bool periodic(int axis) const { return periodic_[axis]; }
  bool fully_periodic() const;
  const std::array<bool, kMaxDim>& periodic_flags() const { return periodic_; }

  MultiIndex unravel(long linear) const;
  long ravel(const MultiIndex& idx) const;
  double center(long idx_along_axis, int axis) const;
  Point center(const MultiIndex& idx) const;
  Point center(long linear) const { return center(unravel(linear)); }

  // Same geometry (dimension, resolution, placement, periodicity) to
  // relative tolerance 1e-12.
  bool same_layout(const Grid& other) const;

 private:
  int dim_;
  long n_;
  long size_;
  Point origin_;
  double h_;
  double cell_volume_;
  std::array<bool, kMaxDim> periodic_;
};

// Grid on the centered cube [-a, a]^d.
Grid make_grid(int dim, long cells_per_axis, double half_width, bool periodic);
// Grid on [lower, upper]^d.
Grid make_box_grid(int dim, long cells_per_axis, double lower, double upper, bool periodic);

class GridFunction {
 public:
  GridFunction(Grid grid, Eigen::VectorXd values, bool nonneg_hint = false);

  static GridFunction zeros(const Grid& grid);
  static GridFunction constant(const Grid& grid, double value);
  static GridFunction sample(const Grid& grid, const std::function<double(const Point&)>& fn,
                             bool nonneg_hint = false);

  const Grid& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  bool nonneg_hint() const { return nonneg_hint_; }
  double operator[](long i) const { return values_[i]; }
  double operator()(const MultiIndex& idx) const { return values_[grid_.ravel(idx)]; }

 private:
  Grid grid_;
  Eigen::VectorXd values_;
  bool nonneg_hint_;
};

// Component-wise vector field on a grid.
struct VectorField {
  Grid grid;
  std::vector<Eigen::VectorXd> components;

  int dim() const { return grid.dim(); }
  GridFunction component(int i) const { return GridFunction(grid, components[i]); }
};

VectorField zero_vector_field(const Grid& grid);

// Union of grid cells.
class CellSet {
 public:
  CellSet(Grid grid, std::vector<char> mask);

  static CellSet empty(const Grid& grid);
  // Cells whose centers lie in the closed box [lower, upper] (per axis).
  static CellSet box(const Grid& grid, const Point& lower, const Point& upper);
  static CellSet from_predicate(const Grid& grid, const std::function<bool(const Point&)>& pred);

  const Grid& grid() const { return grid_; }
  const std::vector<char>& mask() const { return mask_; }
  bool contains(long i) const { return mask_[i] != 0; }
  long count() const { return count_; }
  double measure() const { return static_cast<double>(count_) * grid_.cell_volume(); }
  GridFunction indicator() const;

  CellSet set_union(const CellSet& other) const;
  CellSet set_difference(const CellSet& other) const;

 private:
  Grid grid_;
  std::vector<char> mask_;
  long count_;
};

// Exponents (p, q, r) for a bilinear estimate L^p x L^q -> L^r together with
// the dimension and smoothing order they are used with.
struct ExponentTriple {
  double p;
  double q;
  double r;
  double alpha;
  int dim;

  // r fixed by 1/p + 1/q = 1/r + alpha/d.
  static ExponentTriple from_pq(double p, double q, double alpha, int dim);
  double scaling_defect() const { return 1.0 / p + 1.0 / q - 1.0 / r - alpha / dim; }
  bool scaling_consistent(double tol = 1e-12) const;
};

double integral(const GridFunction& f);
double lebesgue_norm(const GridFunction& f, double p);
double weak_norm(const GridFunction& f, double r);
double weak_norm_upper(const GridFunction& f, double r, double s);

// x -> f(2^k x) on the same grid. Cell averages over the image cell, so for
// step functions aligned with the nested dyadic grids the result is exact.
// Requires N divisible by 2^|k| and a grid whose cell edges are mapped onto
// cell edges by the dilation.
GridFunction dyadic_dilate(const GridFunction& f, int k);

// x -> f(2^k x) represented exactly by keeping the samples and shrinking the
// grid by 2^k about the coordinate origin.
GridFunction rescale_dilate(const GridFunction& f, int k);

}  // namespace riesz
