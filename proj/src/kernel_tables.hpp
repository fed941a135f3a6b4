#pragma once

#include "riesz/grid.hpp"
#include "riesz/kernels.hpp"

#include <array>
#include <vector>

namespace riesz::detail {

// Dense table over integer offsets c (in cells) with lo[a] <= c[a] <= hi[a].
// Each offset carries `channels` weights that already include the cell
// volume and, on periodic axes, the half weights of the two boundary offsets
// +-N/2 of the fundamental cube.
struct OffsetTable {
  int dim = 1;
  int channels = 1;
  std::array<long, kMaxDim> lo{0, 0, 0};
  std::array<long, kMaxDim> hi{0, 0, 0};
  std::vector<double> data;

  long width(int a) const { return hi[a] - lo[a] + 1; }
  long size() const {
    long s = 1;
    for (int a = 0; a < dim; ++a) s *= width(a);
    return s;
  }
  long index(const MultiIndex& c) const {
    long i = 0;
    for (int a = 0; a < dim; ++a) i = i * width(a) + (c[a] - lo[a]);
    return i;
  }
  MultiIndex offset(long index) const {
    MultiIndex c{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
      c[a] = lo[a] + index % width(a);
      index /= width(a);
    }
    return c;
  }
  const double* at(long index) const { return data.data() + index * channels; }
};

// Offsets reachable on this grid: the fundamental cube [-N/2, N/2] on
// periodic axes (N must be even), all differences [-(N-1), N-1] otherwise.
OffsetTable empty_table(const Grid& grid, int channels, long radius_cells = -1);
// Product of periodic boundary half weights for offset c.
double periodic_weight(const Grid& grid, const MultiIndex& c);

OffsetTable riesz_table(const Grid& grid, double alpha);
OffsetTable radial_tensor_table(const Grid& grid, const KernelProfile& profile, double alpha);
OffsetTable ball_table(const Grid& grid, double radius);
// Smallest j with |c| h <= 2^j; the zero offset belongs to every ball.
int dyadic_level(const Grid& grid, const MultiIndex& c);
inline constexpr int kOriginLevel = -100000;
OffsetTable envelope_table(const Grid& grid, double alpha, int jmin, int jmax);
// Weights W_c with sum_c W_c rho(x - c h) approximating the principal value
// of grad K * rho, from the piecewise multilinear interpolant of rho.
OffsetTable force_table(const Grid& grid, double alpha);

// Integrals over the cell of side h centered at c h.
double riesz_cell_integral(int dim, double alpha, const MultiIndex& c, double h);
void radial_tensor_cell_integral(int dim, double alpha, const KernelProfile& profile, const MultiIndex& c,
                                 double h, double* out);

}  // namespace riesz::detail
