#include "riesz/operators.hpp"

#include "kernel_tables.hpp"
#include "product_sweep.hpp"

#include <cmath>
#include <stdexcept>

namespace riesz {

namespace detail {

SupportBox support_box(const GridFunction& f) {
  SupportBox box;
  const Grid& g = f.grid();
  for (long i = 0; i < g.size(); ++i) {
    if (f[i] == 0.0) continue;
    const MultiIndex idx = g.unravel(i);
    for (int a = 0; a < g.dim(); ++a) {
      if (box.empty) {
        box.lo[a] = box.hi[a] = idx[a];
      } else {
        box.lo[a] = std::min(box.lo[a], idx[a]);
        box.hi[a] = std::max(box.hi[a], idx[a]);
      }
    }
    box.empty = false;
  }
  return box;
}

namespace {

std::vector<long> all_cells(const Grid& g) {
  std::vector<long> cells(g.size());
  for (long i = 0; i < g.size(); ++i) cells[i] = i;
  return cells;
}

// out[k * channels + ch] = sum_theta w_theta sum_c P_c(x_k) table[c][ch].
std::vector<double> sweep(const GridFunction& f, const GridFunction& g, const OffsetTable& table,
                          const Eigen::VectorXd& thetas, const Eigen::VectorXd& weights,
                          const std::vector<long>& cells) {
  const int nch = table.channels;
  std::vector<double> out(cells.size() * nch, 0.0);
  ProductSweep ps(f, g, table);
  if (ps.trivially_zero()) return out;
  std::vector<ThetaShift> shifts;
  for (long q = 0; q < thetas.size(); ++q) shifts.push_back(ps.shift(thetas[q]));
  const long count = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long k = 0; k < count; ++k) {
    double acc[6] = {0, 0, 0, 0, 0, 0};
    for (size_t q = 0; q < shifts.size(); ++q) {
      double part[6] = {0, 0, 0, 0, 0, 0};
      ps.visit(cells[k], shifts[q], [&](long idx, double p) {
        if (p == 0.0) return;
        const double* w = table.at(idx);
        for (int ch = 0; ch < nch; ++ch) part[ch] += p * w[ch];
      });
      for (int ch = 0; ch < nch; ++ch) acc[ch] += weights[q] * part[ch];
    }
    for (int ch = 0; ch < nch; ++ch) out[k * nch + ch] = acc[ch];
  }
  return out;
}

Eigen::VectorXd single(double v) { return Eigen::VectorXd::Constant(1, v); }

GridFunction scalar_field(const Grid& grid, const std::vector<double>& v, bool nonneg) {
  return GridFunction(grid, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size())), nonneg);
}

SymTensorField tensor_field(const Grid& grid, const std::vector<double>& v, int nch, double scale) {
  std::vector<Eigen::VectorXd> entries(nch, Eigen::VectorXd(grid.size()));
  for (long i = 0; i < grid.size(); ++i)
    for (int ch = 0; ch < nch; ++ch) entries[ch][i] = scale * v[i * nch + ch];
  return SymTensorField(grid, std::move(entries));
}

void check_pair(const GridFunction& f, const GridFunction& g) {
  if (!f.grid().same_layout(g.grid())) throw std::invalid_argument("operands live on different grids");
}

void check_ball_fits(const Grid& grid, double radius) {
  for (int a = 0; a < grid.dim(); ++a)
    if (grid.periodic(a) && radius > grid.half_width())
      throw std::invalid_argument("truncation ball does not fit in the periodic fundamental cube");
}

bool nonneg_pair(const GridFunction& f, const GridFunction& g) { return f.nonneg_hint() && g.nonneg_hint(); }

}  // namespace
}  // namespace detail

using namespace detail;

GridFunction riesz_potential(const GridFunction& g, double alpha) {
  const Grid& grid = g.grid();
  OperatorParams{alpha, 0.0, grid.dim()}.validate();
  const OffsetTable table = riesz_table(grid, alpha);
  const SupportBox box = support_box(g);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.size());
  if (box.empty) return GridFunction(grid, out, true);
  const long n = grid.cells_per_axis();
  const int d = grid.dim();
  const double* gv = g.values().data();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < grid.size(); ++i) {
    const MultiIndex x = grid.unravel(i);
    std::array<long, kMaxDim> clo{0, 0, 0}, chi{0, 0, 0};
    bool empty = false;
    for (int a = 0; a < d; ++a) {
      clo[a] = table.lo[a];
      chi[a] = table.hi[a];
      if (!grid.periodic(a)) {
        clo[a] = std::max(clo[a], x[a] - box.hi[a]);
        chi[a] = std::min(chi[a], x[a] - box.lo[a]);
      }
      empty = empty || clo[a] > chi[a];
    }
    if (empty) continue;
    MultiIndex c{clo[0], clo[1], clo[2]};
    double s = 0.0;
    while (true) {
      long lin = 0;
      bool ok = true;
      for (int a = 0; a < d; ++a) {
        long m = x[a] - c[a];
        if (grid.periodic(a)) {
          m %= n;
          if (m < 0) m += n;
        } else if (m < 0 || m >= n) {
          ok = false;
        }
        lin = lin * n + m;
      }
      if (ok) s += gv[lin] * table.at(table.index(c))[0];
      int a = d - 1;
      while (a >= 0) {
        if (++c[a] <= chi[a]) break;
        c[a] = clo[a];
        --a;
      }
      if (a < 0) break;
    }
    out[i] = s;
  }
  return GridFunction(grid, std::move(out), g.nonneg_hint());
}

GridFunction bilinear_op(const GridFunction& f, const GridFunction& g, const OperatorParams& params) {
  params.validate();
  check_pair(f, g);
  const OffsetTable table = riesz_table(f.grid(), params.alpha);
  const auto v = sweep(f, g, table, single(params.theta), single(1.0), all_cells(f.grid()));
  return scalar_field(f.grid(), v, nonneg_pair(f, g));
}

double bilinear_op_at(const GridFunction& f, const GridFunction& g, const OperatorParams& params, long cell) {
  params.validate();
  check_pair(f, g);
  const OffsetTable table = riesz_table(f.grid(), params.alpha);
  return sweep(f, g, table, single(params.theta), single(1.0), {cell})[0];
}

GridFunction truncated_unit(const GridFunction& f, const GridFunction& g, double theta) {
  check_pair(f, g);
  OperatorParams{0.5, theta, f.grid().dim()}.validate();
  check_ball_fits(f.grid(), 1.0);
  const OffsetTable table = ball_table(f.grid(), 1.0);
  const auto v = sweep(f, g, table, single(theta), single(1.0), all_cells(f.grid()));
  return scalar_field(f.grid(), v, nonneg_pair(f, g));
}

GridFunction truncated_dyadic(const GridFunction& f, const GridFunction& g, double theta, int j) {
  return truncated_dyadic_family(f, g, theta, j, j).front();
}

std::vector<GridFunction> truncated_dyadic_family(const GridFunction& f, const GridFunction& g, double theta,
                                                  int jmin, int jmax) {
  check_pair(f, g);
  if (jmax < jmin) throw std::invalid_argument("empty dyadic range");
  const Grid& grid = f.grid();
  OperatorParams{0.5, theta, grid.dim()}.validate();
  check_ball_fits(grid, std::ldexp(1.0, jmax));
  // Channel-free bucket table: weight h^d, bucket max(level, jmin) - jmin.
  OffsetTable table = ball_table(grid, std::ldexp(1.0, jmax));
  std::vector<int> bucket(table.size(), -1);
  for (long k = 0; k < table.size(); ++k) {
    if (table.data[k] == 0.0) continue;
    const int level = dyadic_level(grid, table.offset(k));
    bucket[k] = std::max(level, jmin) - jmin;
  }
  const int levels = jmax - jmin + 1;
  std::vector<Eigen::VectorXd> out(levels, Eigen::VectorXd::Zero(grid.size()));
  ProductSweep ps(f, g, table);
  if (!ps.trivially_zero()) {
    const ThetaShift ts = ps.shift(theta);
#pragma omp parallel for schedule(dynamic, 16)
    for (long x = 0; x < grid.size(); ++x) {
      std::vector<double> acc(levels, 0.0);
      ps.visit(x, ts, [&](long idx, double p) {
        if (p != 0.0 && bucket[idx] >= 0) acc[bucket[idx]] += p * table.data[idx];
      });
      double running = 0.0;
      for (int l = 0; l < levels; ++l) {
        running += acc[l];
        out[l][x] = running;
      }
    }
  }
  std::vector<GridFunction> result;
  for (auto& v : out) result.emplace_back(grid, std::move(v), nonneg_pair(f, g));
  return result;
}

DyadicRange default_dyadic_range(const Grid& grid) {
  const double h = grid.spacing();
  const int jmin = static_cast<int>(std::floor(std::log2(0.5 * h)));
  long reach = 0;
  for (int a = 0; a < grid.dim(); ++a) reach = std::max(reach, grid.periodic(a) ? grid.cells_per_axis() / 2 : grid.cells_per_axis() - 1);
  const double far = std::sqrt(static_cast<double>(grid.dim())) * static_cast<double>(reach) * h;
  const int jmax = static_cast<int>(std::ceil(std::log2(far))) + 1;
  return {jmin, jmax};
}

GridFunction dyadic_envelope(const GridFunction& f, const GridFunction& g, const OperatorParams& params,
                             const DyadicRange& range) {
  params.validate();
  check_pair(f, g);
  if (range.jmax < range.jmin) throw std::invalid_argument("empty dyadic range");
  const OffsetTable table = envelope_table(f.grid(), params.alpha, range.jmin, range.jmax);
  const auto v = sweep(f, g, table, single(params.theta), single(1.0), all_cells(f.grid()));
  return scalar_field(f.grid(), v, nonneg_pair(f, g));
}

namespace {

OffsetTable tensor_table_for(const Grid& grid, const OperatorParams& params) {
  return radial_tensor_table(grid, params.profile, params.alpha);
}

}  // namespace

SymTensorField tensor_J(const GridFunction& f, const GridFunction& g, const OperatorParams& params,
                        const ThetaQuadrature& tq) {
  params.validate();
  check_pair(f, g);
  const OffsetTable table = tensor_table_for(f.grid(), params);
  const auto v = sweep(f, g, table, tq.nodes, tq.weights, all_cells(f.grid()));
  return tensor_field(f.grid(), v, table.channels, 1.0);
}

SmallMatrix tensor_J_at(const GridFunction& f, const GridFunction& g, const OperatorParams& params,
                        const ThetaQuadrature& tq, long cell) {
  params.validate();
  check_pair(f, g);
  const OffsetTable table = tensor_table_for(f.grid(), params);
  const auto v = sweep(f, g, table, tq.nodes, tq.weights, {cell});
  const int d = f.grid().dim();
  SmallMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = v[sym_channel(d, i, j)];
  return m;
}

GridFunction theta_averaged_bilinear(const GridFunction& f, const GridFunction& g, const OperatorParams& params,
                                     const ThetaQuadrature& tq) {
  params.validate();
  check_pair(f, g);
  const OffsetTable table = riesz_table(f.grid(), params.alpha);
  const auto v = sweep(f, g, table, tq.nodes, tq.weights, all_cells(f.grid()));
  return scalar_field(f.grid(), v, nonneg_pair(f, g));
}

double theta_averaged_bilinear_at(const GridFunction& f, const GridFunction& g, const OperatorParams& params,
                                  const ThetaQuadrature& tq, long cell) {
  params.validate();
  check_pair(f, g);
  const OffsetTable table = riesz_table(f.grid(), params.alpha);
  return sweep(f, g, table, tq.nodes, tq.weights, {cell})[0];
}

SymTensorField tensor_S(const GridFunction& rho, const OperatorParams& params, const ThetaQuadrature& tq) {
  OperatorParams p = params;
  p.profile = KernelProfile::riesz();
  p.validate();
  const OffsetTable table = radial_tensor_table(rho.grid(), p.profile, p.alpha);
  const auto v = sweep(rho, rho, table, tq.nodes, tq.weights, all_cells(rho.grid()));
  return tensor_field(rho.grid(), v, table.channels, 0.5);
}

SymTensorField general_radial_tensor(const GridFunction& f, const KernelProfile& profile, double alpha,
                                     const ThetaQuadrature& tq) {
  OperatorParams p{alpha, 0.0, f.grid().dim(), profile};
  if (profile.kind == KernelProfile::Kind::riesz) return tensor_S(f, p, tq);
  if (!profile.derivative) throw std::invalid_argument("custom kernel profile needs a derivative");
  const OffsetTable table = radial_tensor_table(f.grid(), profile, alpha);
  const auto v = sweep(f, f, table, tq.nodes, tq.weights, all_cells(f.grid()));
  return tensor_field(f.grid(), v, table.channels, 0.5);
}

VectorField interaction_force_direct(const GridFunction& rho, const OperatorParams& params) {
  OperatorParams p = params;
  p.profile = KernelProfile::riesz();
  p.validate();
  const Grid& grid = rho.grid();
  const OffsetTable table = force_table(grid, p.alpha);
  const int d = grid.dim();
  const long n = grid.cells_per_axis();
  const double* r = rho.values().data();
  VectorField out = zero_vector_field(grid);
  const SupportBox box = support_box(rho);
  if (box.empty) return out;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < grid.size(); ++i) {
    if (r[i] == 0.0) continue;
    const MultiIndex x = grid.unravel(i);
    std::array<long, kMaxDim> clo{0, 0, 0}, chi{0, 0, 0};
    bool empty = false;
    for (int a = 0; a < d; ++a) {
      clo[a] = table.lo[a];
      chi[a] = table.hi[a];
      if (!grid.periodic(a)) {
        clo[a] = std::max(clo[a], x[a] - box.hi[a]);
        chi[a] = std::min(chi[a], x[a] - box.lo[a]);
      }
      empty = empty || clo[a] > chi[a];
    }
    if (empty) continue;
    double acc[kMaxDim] = {0, 0, 0};
    MultiIndex c{clo[0], clo[1], clo[2]};
    while (true) {
      long lin = 0;
      bool ok = true;
      for (int a = 0; a < d; ++a) {
        long m = x[a] - c[a];
        if (grid.periodic(a)) {
          m %= n;
          if (m < 0) m += n;
        } else if (m < 0 || m >= n) {
          ok = false;
        }
        lin = lin * n + m;
      }
      if (ok) {
        const double* w = table.at(table.index(c));
        for (int a = 0; a < d; ++a) acc[a] += w[a] * r[lin];
      }
      int a = d - 1;
      while (a >= 0) {
        if (++c[a] <= chi[a]) break;
        c[a] = clo[a];
        --a;
      }
      if (a < 0) break;
    }
    for (int a = 0; a < d; ++a) out.components[a][i] = r[i] * acc[a];
  }
  return out;
}

namespace {

// Centered derivative along `axis` on a periodic grid.
Eigen::VectorXd periodic_derivative(const Grid& grid, const Eigen::VectorXd& v, int axis, FdScheme scheme) {
  if (!grid.periodic(axis)) throw std::invalid_argument("finite differences need a periodic axis");
  const long n = grid.cells_per_axis();
  const double h = grid.spacing();
  Eigen::VectorXd out(grid.size());
  for (long i = 0; i < grid.size(); ++i) {
    MultiIndex idx = grid.unravel(i);
    auto at = [&](long shift) {
      MultiIndex j = idx;
      j[axis] = ((idx[axis] + shift) % n + n) % n;
      return v[grid.ravel(j)];
    };
    if (scheme == FdScheme::centered2) {
      out[i] = (at(1) - at(-1)) / (2.0 * h);
    } else {
      out[i] = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
    }
  }
  return out;
}

}  // namespace

VectorField divergence(const SymTensorField& s, FdScheme scheme) {
  const Grid& grid = s.grid();
  VectorField out = zero_vector_field(grid);
  for (int i = 0; i < grid.dim(); ++i)
    for (int j = 0; j < grid.dim(); ++j) out.components[i] += periodic_derivative(grid, s.entry(i, j), j, scheme);
  return out;
}

VectorField interaction_force_divergence(const GridFunction& rho, const OperatorParams& params,
                                         const ThetaQuadrature& tq, FdScheme scheme) {
  if (!rho.grid().fully_periodic()) throw std::invalid_argument("divergence form needs a periodic grid");
  return divergence(tensor_S(rho, params, tq), scheme);
}

double force_form_gap(const GridFunction& rho, const OperatorParams& params, const ThetaQuadrature& tq,
                      FdScheme scheme) {
  const VectorField direct = interaction_force_direct(rho, params);
  const VectorField div = interaction_force_divergence(rho, params, tq, scheme);
  double num = 0.0, den = 0.0;
  for (int a = 0; a < direct.dim(); ++a) {
    num += (direct.components[a] - div.components[a]).squaredNorm();
    den += direct.components[a].squaredNorm();
  }
  return std::sqrt(num / den);
}

ShearIdentity shear_identity(const GridFunction& f, const MultiIndex& offset, const ThetaQuadrature& tq,
                             FdScheme scheme) {
  const Grid& grid = f.grid();
  if (!grid.fully_periodic()) throw std::invalid_argument("shear identity check needs a periodic grid");
  const int d = grid.dim();
  const long n = grid.cells_per_axis();
  const double h = grid.spacing();
  // Single-offset table: weight 1 at c = offset.
  OffsetTable table = empty_table(grid, 1);
  for (int a = 0; a < d; ++a)
    if (offset[a] < table.lo[a] || offset[a] > table.hi[a]) throw std::invalid_argument("offset outside the fundamental cube");
  table.data[table.index(offset)] = 1.0;
  const auto v = sweep(f, f, table, tq.nodes, tq.weights, all_cells(grid));
  const Eigen::VectorXd avg = Eigen::Map<const Eigen::VectorXd>(v.data(), grid.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(grid.size());
  for (int a = 0; a < d; ++a)
    if (offset[a] != 0) rhs += static_cast<double>(offset[a]) * h * periodic_derivative(grid, avg, a, scheme);
  Eigen::VectorXd lhs(grid.size());
  for (long i = 0; i < grid.size(); ++i) {
    const MultiIndex x = grid.unravel(i);
    MultiIndex plus = x, minus = x;
    for (int a = 0; a < d; ++a) {
      plus[a] = ((x[a] + offset[a]) % n + n) % n;
      minus[a] = ((x[a] - offset[a]) % n + n) % n;
    }
    lhs[i] = -f[i] * (f(minus) - f(plus));
  }
  return {GridFunction(grid, std::move(lhs)), GridFunction(grid, std::move(rhs))};
}

}  // namespace riesz
