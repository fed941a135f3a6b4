#pragma once

#include "riesz/grid.hpp"

#include <functional>
#include <string>

namespace riesz {

// Radial interaction profile K(x) = k(|x|), described by its derivative k'(s).
struct KernelProfile {
  enum class Kind { riesz, custom };

  Kind kind = Kind::riesz;
  std::function<double(double)> derivative;
  std::string name = "riesz";

  static KernelProfile riesz() { return {}; }
  static KernelProfile custom(std::function<double(double)> dk, std::string name = "custom") {
    return {Kind::custom, std::move(dk), std::move(name)};
  }
};

struct OperatorParams {
  double alpha = 0.5;
  double theta = 0.0;
  int dim = 1;
  KernelProfile profile = KernelProfile::riesz();

  // Throws std::invalid_argument unless 0 < alpha < dim and 0 <= theta <= 1.
  void validate() const;
};

// |x|^{alpha-d} / (d - alpha); throws std::domain_error at x = 0.
double riesz_kernel(const OperatorParams& params, const Point& x);
// Gradient -|x|^{alpha-d-2} x of the kernel above.
Point riesz_kernel_gradient(const OperatorParams& params, const Point& x);

// Average of |y|^{alpha-d} over the cell of side h centered at offset * h.
double cell_averaged_kernel(const OperatorParams& params, const MultiIndex& offset, double h);

// Average of phi(|y|) y_i y_j over the same cell, phi(s) = -k'(s)/s
// (phi(s) = s^{alpha-d-2} for the Riesz profile). Entries in
// upper-triangular channel order.
Eigen::VectorXd cell_averaged_radial_tensor(const OperatorParams& params, const MultiIndex& offset, double h);

}  // namespace riesz
