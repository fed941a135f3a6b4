#pragma once

#include "kernel_tables.hpp"
#include "riesz/grid.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace riesz::detail {

// Bounding box of the nonzero values of f; empty() when f == 0.
struct SupportBox {
  std::array<long, kMaxDim> lo{0, 0, 0};
  std::array<long, kMaxDim> hi{-1, -1, -1};
  bool empty = true;
};
SupportBox support_box(const GridFunction& f);

// Precomputed split (theta - 1) c = shift + frac per axis for one theta.
struct ThetaShift {
  double theta = 0.0;
  std::array<std::vector<long>, kMaxDim> shift;
  std::array<std::vector<double>, kMaxDim> frac;
};

// Visits, for an output cell x, every table offset c whose interpolated
// product P_c(x) = sum_corners w f(n) g(n + c), n near x + (theta-1) c, can
// be nonzero. Offsets are visited in increasing table index order.
class ProductSweep {
 public:
  ProductSweep(const GridFunction& f, const GridFunction& g, const OffsetTable& table)
      : grid_(f.grid()), f_(f.values().data()), g_(g.values().data()), table_(table) {
    if (!f.grid().same_layout(g.grid())) throw std::invalid_argument("operands live on different grids");
    fbox_ = support_box(f);
    gbox_ = support_box(g);
    n_ = grid_.cells_per_axis();
    d_ = grid_.dim();
  }

  bool trivially_zero() const { return fbox_.empty || gbox_.empty; }

  ThetaShift shift(double theta) const {
    ThetaShift s;
    s.theta = theta;
    for (int a = 0; a < d_; ++a) {
      const long w = table_.width(a);
      s.shift[a].resize(w);
      s.frac[a].resize(w);
      for (long k = 0; k < w; ++k) {
        const long c = table_.lo[a] + k;
        const double z = (theta - 1.0) * static_cast<double>(c);
        double fl = std::floor(z);
        double fr = z - fl;
        if (fr >= 1.0) {
          fl += 1.0;
          fr = 0.0;
        }
        s.shift[a][k] = static_cast<long>(fl);
        s.frac[a][k] = fr;
      }
    }
    return s;
  }

  template <class Visit>
  void visit(long x_linear, const ThetaShift& ts, Visit&& visit) const {
    const MultiIndex x = grid_.unravel(x_linear);
    std::array<long, kMaxDim> clo{0, 0, 0}, chi{0, 0, 0};
    for (int a = 0; a < d_; ++a) {
      clo[a] = table_.lo[a];
      chi[a] = table_.hi[a];
      if (grid_.periodic(a)) continue;
      // n in supp f and n + c in supp g.
      clo[a] = std::max(clo[a], gbox_.lo[a] - fbox_.hi[a] - 1);
      chi[a] = std::min(chi[a], gbox_.hi[a] - fbox_.lo[a] + 1);
      const double th = ts.theta;
      const double xa = static_cast<double>(x[a]);
      if (th < 1.0) {
        // x + (theta - 1) c within (flo - 1, fhi + 1).
        const double lo = (xa - static_cast<double>(fbox_.hi[a]) - 1.0) / (1.0 - th);
        const double hi = (xa - static_cast<double>(fbox_.lo[a]) + 1.0) / (1.0 - th);
        clo[a] = std::max(clo[a], clamp_floor(lo) - 1);
        chi[a] = std::min(chi[a], clamp_ceil(hi) + 1);
      }
      if (th > 0.0) {
        // x + theta c within (glo - 1, ghi + 1).
        const double lo = (static_cast<double>(gbox_.lo[a]) - 1.0 - xa) / th;
        const double hi = (static_cast<double>(gbox_.hi[a]) + 1.0 - xa) / th;
        clo[a] = std::max(clo[a], clamp_floor(lo) - 1);
        chi[a] = std::min(chi[a], clamp_ceil(hi) + 1);
      }
      if (clo[a] > chi[a]) return;
    }
    if (d_ == 1) {
      visit_1d(x[0], clo[0], chi[0], ts, visit);
      return;
    }
    MultiIndex c{clo[0], clo[1], clo[2]};
    while (true) {
      visit(table_.index(c), product(x, c, ts));
      int a = d_ - 1;
      while (a >= 0) {
        if (++c[a] <= chi[a]) break;
        c[a] = clo[a];
        --a;
      }
      if (a < 0) break;
    }
  }

 private:
  static long clamp_floor(double v) {
    constexpr double big = 1e15;
    return static_cast<long>(std::floor(std::max(-big, std::min(big, v))));
  }
  static long clamp_ceil(double v) {
    constexpr double big = 1e15;
    return static_cast<long>(std::ceil(std::max(-big, std::min(big, v))));
  }

  // Wrapped index or -1 when outside a non-periodic axis.
  long wrap(long i, int a) const {
    if (grid_.periodic(a)) {
      i %= n_;
      return i < 0 ? i + n_ : i;
    }
    return (i < 0 || i >= n_) ? -1 : i;
  }

  template <class Visit>
  void visit_1d(long x, long clo, long chi, const ThetaShift& ts, Visit& visit) const {
    for (long c = clo; c <= chi; ++c) {
      const long k = c - table_.lo[0];
      const long base = x + ts.shift[0][k];
      const double t = ts.frac[0][k];
      double p = 0.0;
      const long n0 = wrap(base, 0), m0 = wrap(base + c, 0);
      if (n0 >= 0 && m0 >= 0) p += (1.0 - t) * f_[n0] * g_[m0];
      if (t != 0.0) {
        const long n1 = wrap(base + 1, 0), m1 = wrap(base + 1 + c, 0);
        if (n1 >= 0 && m1 >= 0) p += t * f_[n1] * g_[m1];
      }
      visit(k, p);
    }
  }

  double product(const MultiIndex& x, const MultiIndex& c, const ThetaShift& ts) const {
    long fi[kMaxDim][2], gi[kMaxDim][2];
    double w[kMaxDim][2];
    for (int a = 0; a < d_; ++a) {
      const long k = c[a] - table_.lo[a];
      const long base = x[a] + ts.shift[a][k];
      const double t = ts.frac[a][k];
      w[a][0] = 1.0 - t;
      w[a][1] = t;
      for (int e = 0; e < 2; ++e) {
        fi[a][e] = wrap(base + e, a);
        gi[a][e] = wrap(base + e + c[a], a);
      }
    }
    double p = 0.0;
    for (int corner = 0; corner < (1 << d_); ++corner) {
      double wt = 1.0;
      long lf = 0, lg = 0;
      bool ok = true;
      for (int a = 0; a < d_; ++a) {
        const int e = (corner >> a) & 1;
        wt *= w[a][e];
        if (fi[a][e] < 0 || gi[a][e] < 0) ok = false;
        lf = lf * n_ + fi[a][e];
        lg = lg * n_ + gi[a][e];
      }
      if (ok && wt != 0.0) p += wt * f_[lf] * g_[lg];
    }
    return p;
  }

  const Grid& grid_;
  const double* f_;
  const double* g_;
  const OffsetTable& table_;
  SupportBox fbox_, gbox_;
  long n_;
  int d_;
};

}  // namespace riesz::detail
