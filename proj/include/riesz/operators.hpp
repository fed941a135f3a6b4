#pragma once

#include "riesz/grid.hpp"
#include "riesz/kernels.hpp"
#include "riesz/quadrature.hpp"
#include "riesz/tensor_field.hpp"

#include <vector>

namespace riesz {

// Shifted arguments x + (theta - 1) y and x + theta y are sampled by
// multilinear interpolation of the product f(z) g(z + y) between cell
// centers, with periodic wrap or zero extension per axis. Periodic
// convolutions integrate y over the fundamental cube only.

// (I_alpha g)(x) = int g(x - y) |y|^{alpha-d} dy.
GridFunction riesz_potential(const GridFunction& g, double alpha);

// I_alpha^theta(f, g)(x) = int f(x + (theta-1) y) g(x + theta y) |y|^{alpha-d} dy.
GridFunction bilinear_op(const GridFunction& f, const GridFunction& g, const OperatorParams& params);
double bilinear_op_at(const GridFunction& f, const GridFunction& g, const OperatorParams& params, long cell);

// Kernel replaced by the indicator of |y| <= 1.
GridFunction truncated_unit(const GridFunction& f, const GridFunction& g, double theta);
// Kernel replaced by the indicator of |y| <= 2^j. On periodic grids the ball
// must fit in the fundamental cube.
GridFunction truncated_dyadic(const GridFunction& f, const GridFunction& g, double theta, int j);
// All truncations jmin..jmax from one sweep (entry k holds j = jmin + k).
std::vector<GridFunction> truncated_dyadic_family(const GridFunction& f, const GridFunction& g, double theta,
                                                  int jmin, int jmax);

struct DyadicRange {
  int jmin;
  int jmax;
};
// Range whose balls resolve the origin cell and cover every grid offset.
DyadicRange default_dyadic_range(const Grid& grid);

// 2^{d-alpha} sum_{j in range} 2^{(alpha-d) j} I_j^theta(f, g).
GridFunction dyadic_envelope(const GridFunction& f, const GridFunction& g, const OperatorParams& params,
                             const DyadicRange& range);

// J(f, g)(x) = int_0^1 int f(x+(theta-1)y) g(x+theta y) phi(|y|) y (x) y dy dtheta
// with phi(s) = -k'(s)/s from params.profile (s^{alpha-d-2} for Riesz).
SymTensorField tensor_J(const GridFunction& f, const GridFunction& g, const OperatorParams& params,
                        const ThetaQuadrature& tq);
SmallMatrix tensor_J_at(const GridFunction& f, const GridFunction& g, const OperatorParams& params,
                        const ThetaQuadrature& tq, long cell);
// int_0^1 I_alpha^theta(f, g) dtheta under the same quadrature.
GridFunction theta_averaged_bilinear(const GridFunction& f, const GridFunction& g, const OperatorParams& params,
                                     const ThetaQuadrature& tq);
double theta_averaged_bilinear_at(const GridFunction& f, const GridFunction& g, const OperatorParams& params,
                                  const ThetaQuadrature& tq, long cell);

// S(rho) = J(rho, rho) / 2 (Riesz profile).
SymTensorField tensor_S(const GridFunction& rho, const OperatorParams& params, const ThetaQuadrature& tq);
// S(f) = -1/2 int int k'(|y|)/|y| f(x+(theta-1)y) f(x+theta y) y (x) y for a
// general radial profile; the Riesz profile takes the tensor_S path.
SymTensorField general_radial_tensor(const GridFunction& f, const KernelProfile& profile, double alpha,
                                     const ThetaQuadrature& tq);

// rho (grad K_alpha * rho) with the principal-value convolution integrated
// against the multilinear interpolant of rho.
VectorField interaction_force_direct(const GridFunction& rho, const OperatorParams& params);

enum class FdScheme { centered2, centered4 };

// Divergence of a tensor field on a periodic grid: (div S)_i = sum_j d_j S_ij.
VectorField divergence(const SymTensorField& s, FdScheme scheme);
VectorField interaction_force_divergence(const GridFunction& rho, const OperatorParams& params,
                                         const ThetaQuadrature& tq, FdScheme scheme);
// ||direct - divergence||_2 / ||direct||_2 for the two force evaluations above.
double force_form_gap(const GridFunction& rho, const OperatorParams& params, const ThetaQuadrature& tq,
                      FdScheme scheme);

// Both sides of -f(x)(f(x-y) - f(x+y)) = div_x int_0^1 y f(x+(theta-1)y) f(x+theta y) dtheta
// for the fixed grid offset y = offset * h on a periodic grid.
struct ShearIdentity {
  GridFunction lhs;
  GridFunction rhs;
};
ShearIdentity shear_identity(const GridFunction& f, const MultiIndex& offset, const ThetaQuadrature& tq,
                             FdScheme scheme);

}  // namespace riesz
