#include "riesz/kernels.hpp"

#include "kernel_tables.hpp"
#include "riesz/quadrature.hpp"
#include "riesz/tensor_field.hpp"

#include <cmath>
#include <stdexcept>

namespace riesz {

void OperatorParams::validate() const {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension must be 1, 2 or 3");
  if (!(alpha > 0.0 && alpha < dim)) throw std::invalid_argument("alpha must lie in (0, d)");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");
  if (profile.kind == KernelProfile::Kind::custom && !profile.derivative)
    throw std::invalid_argument("custom kernel profile needs a derivative");
}

double riesz_kernel(const OperatorParams& params, const Point& x) {
  params.validate();
  const double r = x.norm();
  if (r == 0.0) throw std::domain_error("Riesz kernel is singular at the origin");
  return std::pow(r, params.alpha - params.dim) / (params.dim - params.alpha);
}

Point riesz_kernel_gradient(const OperatorParams& params, const Point& x) {
  params.validate();
  const double r = x.norm();
  if (r == 0.0) throw std::domain_error("Riesz kernel is singular at the origin");
  return -std::pow(r, params.alpha - params.dim - 2.0) * x;
}

double cell_averaged_kernel(const OperatorParams& params, const MultiIndex& offset, double h) {
  params.validate();
  if (!(h > 0.0)) throw std::invalid_argument("cell size must be positive");
  return detail::riesz_cell_integral(params.dim, params.alpha, offset, h) / std::pow(h, params.dim);
}

Eigen::VectorXd cell_averaged_radial_tensor(const OperatorParams& params, const MultiIndex& offset, double h) {
  params.validate();
  if (!(h > 0.0)) throw std::invalid_argument("cell size must be positive");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(sym_channel_count(params.dim));
  detail::radial_tensor_cell_integral(params.dim, params.alpha, params.profile, offset, h, out.data());
  return out / std::pow(h, params.dim);
}

namespace detail {

namespace {

const QuadratureRule& unit_rule(int n) {
  // Gauss-Legendre rules on [0, 1], built once.
  static const std::vector<QuadratureRule> rules = [] {
    std::vector<QuadratureRule> r;
    r.push_back({});
    for (int k = 1; k <= 32; ++k) r.push_back(gauss_legendre(k, 0.0, 1.0));
    return r;
  }();
  return rules.at(n);
}

long chebyshev_norm(const MultiIndex& c, int d) {
  long m = 0;
  for (int a = 0; a < d; ++a) m = std::max(m, std::abs(c[a]));
  return m;
}

int nodes_for_distance(long cells) {
  if (cells <= 2) return 12;
  if (cells <= 8) return 6;
  return 4;
}

// Tensor Gauss rule on the box prod [lo[a], lo[a] + h]; calls
// f(y, weight) for every node.
template <class F>
void gauss_box(int d, const double* lo, double h, int n, F&& f) {
  const auto& r = unit_rule(n);
  long total = 1;
  for (int a = 0; a < d; ++a) total *= n;
  double y[kMaxDim];
  for (long k = 0; k < total; ++k) {
    long rem = k;
    double w = 1.0;
    for (int a = d - 1; a >= 0; --a) {
      const int i = static_cast<int>(rem % n);
      rem /= n;
      y[a] = lo[a] + h * r.nodes[i];
      w *= h * r.weights[i];
    }
    f(y, w);
  }
}

// Gauss rule on the face {y_k = sign * h/2} of the origin cell, calling
// f(z, weight) with z the face point.
template <class F>
void gauss_origin_faces(int d, double h, int n, F&& f) {
  const auto& r = unit_rule(n);
  long total = 1;
  for (int a = 0; a < d - 1; ++a) total *= n;
  double z[kMaxDim];
  for (int k = 0; k < d; ++k) {
    for (double sign : {-1.0, 1.0}) {
      for (long m = 0; m < total; ++m) {
        long rem = m;
        double w = 1.0;
        for (int a = d - 1; a >= 0; --a) {
          if (a == k) {
            z[a] = sign * 0.5 * h;
            continue;
          }
          const int i = static_cast<int>(rem % n);
          rem /= n;
          z[a] = h * (r.nodes[i] - 0.5);
          w *= h * r.weights[i];
        }
        f(z, w);
      }
    }
  }
}

double norm(const double* y, int d) {
  double s = 0.0;
  for (int a = 0; a < d; ++a) s += y[a] * y[a];
  return std::sqrt(s);
}

double phi(const KernelProfile& profile, double alpha, int d, double s) {
  if (profile.kind == KernelProfile::Kind::riesz) return std::pow(s, alpha - d - 2.0);
  return -profile.derivative(s) / s;
}

}  // namespace

double riesz_cell_integral(int d, double alpha, const MultiIndex& c, double h) {
  const long m = chebyshev_norm(c, d);
  if (d == 1) {
    if (m == 0) return 2.0 * std::pow(0.5 * h, alpha) / alpha;
    const double a = (m - 0.5) * h, b = (m + 0.5) * h;
    return (std::pow(b, alpha) - std::pow(a, alpha)) / alpha;
  }
  if (m == 0) {
    // Pyramids with apex at the origin over the 2d faces:
    // int_pyramid |y|^{alpha-d} = (h / (2 alpha)) int_face |z|^{alpha-d}.
    double face = 0.0;
    gauss_origin_faces(d, h, 20, [&](const double* z, double w) { face += w * std::pow(norm(z, d), alpha - d); });
    return h / (2.0 * alpha) * face;
  }
  double lo[kMaxDim];
  for (int a = 0; a < d; ++a) lo[a] = (c[a] - 0.5) * h;
  double s = 0.0;
  gauss_box(d, lo, h, nodes_for_distance(m), [&](const double* y, double w) { s += w * std::pow(norm(y, d), alpha - d); });
  return s;
}

void radial_tensor_cell_integral(int d, double alpha, const KernelProfile& profile, const MultiIndex& c, double h,
                                 double* out) {
  const int nch = sym_channel_count(d);
  for (int k = 0; k < nch; ++k) out[k] = 0.0;
  const long m = chebyshev_norm(c, d);
  const bool riesz = profile.kind == KernelProfile::Kind::riesz;
  if (riesz && (m == 0 || d == 1)) {
    // In 1D phi(|y|) y^2 = |y|^{alpha-1}; at the origin cell the diagonal
    // entries share the scalar integral equally and the off-diagonal ones vanish.
    const double s = riesz_cell_integral(d, alpha, c, h);
    for (int i = 0; i < d; ++i) out[sym_channel(d, i, i)] = s / d;
    return;
  }
  auto add = [&](const double* y, double w, double scale) {
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) out[sym_channel(d, i, j)] += w * scale * y[i] * y[j];
  };
  if (m == 0) {
    // int_pyramid F = (h/2) int_face int_0^1 phi(t|z|) t^2 z z^T t^{d-1} dt.
    // The t-integrand may be singular at 0: integrate over dyadic pieces
    // [2^{-k-1}, 2^{-k}] and close with the geometric tail of the last two.
    const auto& rt = unit_rule(10);
    gauss_origin_faces(d, h, 20, [&](const double* z, double w) {
      const double rz = norm(z, d);
      double radial = 0.0, prev = 0.0, last = 0.0, hi = 1.0;
      for (int level = 0; level < 48; ++level) {
        const double lo = 0.5 * hi;
        double piece = 0.0;
        for (int i = 0; i < rt.size(); ++i) {
          const double t = lo + (hi - lo) * rt.nodes[i];
          piece += rt.weights[i] * (hi - lo) * phi(profile, alpha, d, t * rz) * std::pow(t, d + 1);
        }
        radial += piece;
        prev = last;
        last = piece;
        hi = lo;
      }
      const double ratio = prev != 0.0 ? last / prev : 0.0;
      if (ratio > 0.0 && ratio < 1.0) radial += last * ratio / (1.0 - ratio);
      add(z, w, 0.5 * h * radial);
    });
    return;
  }
  double lo[kMaxDim];
  for (int a = 0; a < d; ++a) lo[a] = (c[a] - 0.5) * h;
  gauss_box(d, lo, h, nodes_for_distance(m), [&](const double* y, double w) { add(y, w, phi(profile, alpha, d, norm(y, d))); });
}

namespace {

// Reflection-symmetric fill: compute entries for offsets with c >= 0 and
// mirror them. `parity(c, ch)` returns the sign picked up by channel ch.
template <class Compute, class Parity>
void fill_symmetric(OffsetTable& t, Compute&& compute, Parity&& parity) {
  const int d = t.dim;
  std::vector<double> buf(t.channels);
  std::array<long, kMaxDim> top{0, 0, 0};
  for (int a = 0; a < d; ++a) top[a] = std::max(std::abs(t.lo[a]), std::abs(t.hi[a]));
  long total = 1;
  for (int a = 0; a < d; ++a) total *= top[a] + 1;
  for (long k = 0; k < total; ++k) {
    MultiIndex c{0, 0, 0};
    long rem = k;
    for (int a = d - 1; a >= 0; --a) {
      c[a] = rem % (top[a] + 1);
      rem /= top[a] + 1;
    }
    bool needed = false;
    for (int mask = 0; mask < (1 << d) && !needed; ++mask) {
      bool in = true;
      for (int a = 0; a < d; ++a) {
        const long v = (mask >> a & 1) ? -c[a] : c[a];
        in = in && v >= t.lo[a] && v <= t.hi[a];
      }
      needed = in;
    }
    if (!needed) continue;
    compute(c, buf.data());
    for (int mask = 0; mask < (1 << d); ++mask) {
      MultiIndex r = c;
      bool in = true, duplicate = false;
      for (int a = 0; a < d; ++a) {
        if (mask >> a & 1) {
          if (c[a] == 0) duplicate = true;
          r[a] = -c[a];
        }
        in = in && r[a] >= t.lo[a] && r[a] <= t.hi[a];
      }
      if (!in || duplicate) continue;
      double* dst = t.data.data() + t.index(r) * t.channels;
      for (int ch = 0; ch < t.channels; ++ch) dst[ch] = parity(mask, ch) * buf[ch];
    }
  }
}

}  // namespace

OffsetTable empty_table(const Grid& grid, int channels, long radius_cells) {
  OffsetTable t;
  t.dim = grid.dim();
  t.channels = channels;
  const long n = grid.cells_per_axis();
  for (int a = 0; a < t.dim; ++a) {
    long r;
    if (grid.periodic(a)) {
      if (n % 2 != 0) throw std::invalid_argument("periodic operators need an even number of cells per axis");
      r = n / 2;
    } else {
      r = n - 1;
    }
    if (radius_cells >= 0) r = std::min(r, radius_cells);
    t.lo[a] = -r;
    t.hi[a] = r;
  }
  t.data.assign(static_cast<size_t>(t.size()) * channels, 0.0);
  return t;
}

double periodic_weight(const Grid& grid, const MultiIndex& c) {
  double w = 1.0;
  const long half = grid.cells_per_axis() / 2;
  for (int a = 0; a < grid.dim(); ++a)
    if (grid.periodic(a) && std::abs(c[a]) == half) w *= 0.5;
  return w;
}

OffsetTable riesz_table(const Grid& grid, double alpha) {
  OffsetTable t = empty_table(grid, 1);
  const int d = grid.dim();
  const double h = grid.spacing();
  fill_symmetric(
      t, [&](const MultiIndex& c, double* out) { out[0] = riesz_cell_integral(d, alpha, c, h) * periodic_weight(grid, c); },
      [](int, int) { return 1.0; });
  return t;
}

OffsetTable radial_tensor_table(const Grid& grid, const KernelProfile& profile, double alpha) {
  const int d = grid.dim();
  OffsetTable t = empty_table(grid, sym_channel_count(d));
  const double h = grid.spacing();
  fill_symmetric(
      t,
      [&](const MultiIndex& c, double* out) {
        radial_tensor_cell_integral(d, alpha, profile, c, h, out);
        const double w = periodic_weight(grid, c);
        for (int k = 0; k < t.channels; ++k) out[k] *= w;
      },
      [d](int mask, int ch) {
        for (int i = 0; i < d; ++i)
          for (int j = i; j < d; ++j)
            if (sym_channel(d, i, j) == ch) return (((mask >> i) ^ (mask >> j)) & 1) ? -1.0 : 1.0;
        return 1.0;
      });
  return t;
}

OffsetTable ball_table(const Grid& grid, double radius) {
  const double h = grid.spacing();
  const long rc = static_cast<long>(std::floor(radius / h)) + 1;
  OffsetTable t = empty_table(grid, 1, rc);
  for (long k = 0; k < t.size(); ++k) {
    const MultiIndex c = t.offset(k);
    double r2 = 0.0;
    for (int a = 0; a < t.dim; ++a) r2 += static_cast<double>(c[a] * c[a]);
    if (std::sqrt(r2) * h <= radius) t.data[k] = grid.cell_volume() * periodic_weight(grid, c);
  }
  return t;
}

int dyadic_level(const Grid& grid, const MultiIndex& c) {
  double r2 = 0.0;
  for (int a = 0; a < grid.dim(); ++a) r2 += static_cast<double>(c[a] * c[a]);
  if (r2 == 0.0) return kOriginLevel;
  const double r = std::sqrt(r2) * grid.spacing();
  int j = static_cast<int>(std::ceil(std::log2(r)));
  while (r > std::ldexp(1.0, j)) ++j;
  while (r <= std::ldexp(1.0, j - 1)) --j;
  return j;
}

OffsetTable envelope_table(const Grid& grid, double alpha, int jmin, int jmax) {
  OffsetTable t = empty_table(grid, 1);
  const int d = grid.dim();
  const double pre = std::pow(2.0, d - alpha);
  for (long k = 0; k < t.size(); ++k) {
    const MultiIndex c = t.offset(k);
    const int level = dyadic_level(grid, c);
    if (level > jmax) continue;
    double s = 0.0;
    for (int j = std::max(level, jmin); j <= jmax; ++j) s += std::pow(2.0, (alpha - d) * j);
    t.data[k] = pre * s * grid.cell_volume() * periodic_weight(grid, c);
  }
  return t;
}

namespace {

// Coefficients of prod_a (type_a ? t z_a : 1 - t z_a) in powers of t.
void hat_polynomial(int d, const double* z, const bool* rising, double* coeff) {
  for (int k = 0; k <= d; ++k) coeff[k] = 0.0;
  coeff[0] = 1.0;
  for (int a = 0; a < d; ++a) {
    double next[kMaxDim + 1] = {0, 0, 0, 0};
    for (int k = 0; k <= a; ++k) {
      if (rising[a]) {
        next[k + 1] += coeff[k] * z[a];
      } else {
        next[k] += coeff[k];
        next[k + 1] -= coeff[k] * z[a];
      }
    }
    for (int k = 0; k <= d; ++k) coeff[k] = next[k];
  }
}

// W_c for an offset c with all c[a] >= 0, integrating over y in the box
// [lim_lo, lim_hi] (cell units).
void force_weight(int d, double alpha, const MultiIndex& c, double h, const std::array<long, kMaxDim>& lim_lo,
                  const std::array<long, kMaxDim>& lim_hi, double* out) {
  for (int a = 0; a < d; ++a) out[a] = 0.0;
  if (chebyshev_norm(c, d) == 0) return;
  for (int mask = 0; mask < (1 << d); ++mask) {
    // Sub-cube [c_a - 1, c_a] where the hat rises, [c_a, c_a + 1] where it falls.
    long lo[kMaxDim];
    bool rising[kMaxDim];
    bool inside = true, touches = true;
    for (int a = 0; a < d; ++a) {
      rising[a] = (mask >> a) & 1;
      lo[a] = rising[a] ? c[a] - 1 : c[a];
      inside = inside && lo[a] >= lim_lo[a] && lo[a] + 1 <= lim_hi[a];
      touches = touches && (lo[a] == 0 || lo[a] == -1);
    }
    if (!inside) continue;
    if (touches) {
      // Origin is a corner of the sub-cube. Map to u in [0,1]^d with
      // y = h sigma u, split into pyramids over the faces u_k = 1 and
      // integrate the radial variable exactly:
      // int_0^1 t^{alpha-2} t^k dt = 1 / (alpha - 1 + k), k >= 1.
      double sigma[kMaxDim];
      bool grows[kMaxDim];
      for (int a = 0; a < d; ++a) {
        sigma[a] = lo[a] == 0 ? 1.0 : -1.0;
        // Hat is u on the sub-cube when c_a != 0, 1 - u when c_a == 0.
        grows[a] = c[a] != 0;
      }
      const auto& r = unit_rule(12);
      long total = 1;
      for (int a = 0; a < d - 1; ++a) total *= r.size();
      double acc[kMaxDim] = {0, 0, 0};
      for (int k = 0; k < d; ++k) {
        for (long m = 0; m < total; ++m) {
          double z[kMaxDim];
          double w = 1.0;
          long rem = m;
          for (int a = d - 1; a >= 0; --a) {
            if (a == k) {
              z[a] = 1.0;
              continue;
            }
            const int i = static_cast<int>(rem % r.size());
            rem /= r.size();
            z[a] = r.nodes[i];
            w *= r.weights[i];
          }
          double coeff[kMaxDim + 1];
          hat_polynomial(d, z, grows, coeff);
          double radial = 0.0;
          for (int p = 1; p <= d; ++p) radial += coeff[p] / (alpha - 1.0 + p);
          const double scale = w * std::pow(norm(z, d), alpha - d - 2.0) * radial;
          for (int a = 0; a < d; ++a) acc[a] += scale * z[a];
        }
      }
      const double pre = -std::pow(h, alpha - 1.0);
      for (int a = 0; a < d; ++a) out[a] += pre * sigma[a] * acc[a];
      continue;
    }
    long far = 0;
    for (int a = 0; a < d; ++a) far = std::max(far, std::max(std::abs(lo[a]), std::abs(lo[a] + 1)));
    double plo[kMaxDim];
    for (int a = 0; a < d; ++a) plo[a] = lo[a] * h;
    gauss_box(d, plo, h, nodes_for_distance(far), [&](const double* y, double w) {
      double hat = 1.0;
      for (int a = 0; a < d; ++a) hat *= 1.0 - std::abs(y[a] / h - static_cast<double>(c[a]));
      const double g = -w * hat * std::pow(norm(y, d), alpha - d - 2.0);
      for (int a = 0; a < d; ++a) out[a] += g * y[a];
    });
  }
}

}  // namespace

OffsetTable force_table(const Grid& grid, double alpha) {
  const int d = grid.dim();
  OffsetTable t = empty_table(grid, d);
  std::array<long, kMaxDim> lim_lo{0, 0, 0}, lim_hi{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    const long n = grid.cells_per_axis();
    lim_lo[a] = grid.periodic(a) ? -n / 2 : -n;
    lim_hi[a] = grid.periodic(a) ? n / 2 : n;
  }
  const double h = grid.spacing();
  fill_symmetric(
      t, [&](const MultiIndex& c, double* out) { force_weight(d, alpha, c, h, lim_lo, lim_hi, out); },
      [](int mask, int ch) { return ((mask >> ch) & 1) ? -1.0 : 1.0; });
  return t;
}

}  // namespace detail
}  // namespace riesz
