#include "riesz/grid.hpp"

#include "riesz/summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace riesz {

Grid::Grid(int dim, long cells_per_axis, const Point& origin, double spacing,
           const std::array<bool, kMaxDim>& periodic)
    : dim_(dim), n_(cells_per_axis), origin_(origin), h_(spacing), periodic_(periodic) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (cells_per_axis < 2) throw std::invalid_argument("grid needs at least 2 cells per axis");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw std::invalid_argument("grid spacing must be positive");
  if (origin.size() != dim) throw std::invalid_argument("grid origin has wrong dimension");
  size_ = 1;
  for (int i = 0; i < dim; ++i) size_ *= n_;
  cell_volume_ = std::pow(h_, dim);
  for (int i = dim; i < kMaxDim; ++i) periodic_[i] = false;
}

bool Grid::fully_periodic() const {
  for (int i = 0; i < dim_; ++i)
    if (!periodic_[i]) return false;
  return true;
}

MultiIndex Grid::unravel(long linear) const {
  MultiIndex idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = linear % n_;
    linear /= n_;
  }
  return idx;
}

long Grid::ravel(const MultiIndex& idx) const {
  long linear = 0;
  for (int a = 0; a < dim_; ++a) linear = linear * n_ + idx[a];
  return linear;
}

double Grid::center(long i, int axis) const {
  return origin_[axis] + (static_cast<double>(i) + 0.5) * h_;
}

Point Grid::center(const MultiIndex& idx) const {
  Point x(dim_);
  for (int a = 0; a < dim_; ++a) x[a] = center(idx[a], a);
  return x;
}

bool Grid::same_layout(const Grid& o) const {
  if (dim_ != o.dim_ || n_ != o.n_) return false;
  const double scale = extent();
  if (std::abs(h_ - o.h_) > 1e-12 * h_) return false;
  for (int a = 0; a < dim_; ++a) {
    if (periodic_[a] != o.periodic_[a]) return false;
    if (std::abs(origin_[a] - o.origin_[a]) > 1e-12 * scale) return false;
  }
  return true;
}

Grid make_grid(int dim, long cells_per_axis, double half_width, bool periodic) {
  if (!(half_width > 0.0)) throw std::invalid_argument("half_width must be positive");
  return make_box_grid(dim, cells_per_axis, -half_width, half_width, periodic);
}

Grid make_box_grid(int dim, long cells_per_axis, double lower, double upper, bool periodic) {
  if (!(upper > lower)) throw std::invalid_argument("box upper bound must exceed lower bound");
  if (cells_per_axis < 2) throw std::invalid_argument("grid needs at least 2 cells per axis");
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  Point origin = Point::Constant(dim, lower);
  return Grid(dim, cells_per_axis, origin, (upper - lower) / static_cast<double>(cells_per_axis),
              {periodic, periodic, periodic});
}

GridFunction::GridFunction(Grid grid, Eigen::VectorXd values, bool nonneg_hint)
    : grid_(std::move(grid)), values_(std::move(values)), nonneg_hint_(nonneg_hint) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("grid function has " + std::to_string(values_.size()) +
                                " values, grid has " + std::to_string(grid_.size()) + " cells");
  if (!values_.allFinite()) throw std::invalid_argument("grid function values must be finite");
  if (nonneg_hint_ && values_.size() > 0 && values_.minCoeff() < 0.0)
    throw std::invalid_argument("grid function flagged nonnegative has negative values");
}

GridFunction GridFunction::zeros(const Grid& grid) {
  return GridFunction(grid, Eigen::VectorXd::Zero(grid.size()), true);
}

GridFunction GridFunction::constant(const Grid& grid, double value) {
  return GridFunction(grid, Eigen::VectorXd::Constant(grid.size(), value), value >= 0.0);
}

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(const Point&)>& fn,
                                  bool nonneg_hint) {
  Eigen::VectorXd v(grid.size());
  for (long i = 0; i < grid.size(); ++i) v[i] = fn(grid.center(i));
  return GridFunction(grid, std::move(v), nonneg_hint);
}

VectorField zero_vector_field(const Grid& grid) {
  VectorField v{grid, {}};
  for (int i = 0; i < grid.dim(); ++i) v.components.push_back(Eigen::VectorXd::Zero(grid.size()));
  return v;
}

CellSet::CellSet(Grid grid, std::vector<char> mask) : grid_(std::move(grid)), mask_(std::move(mask)) {
  if (static_cast<long>(mask_.size()) != grid_.size())
    throw std::invalid_argument("cell set mask does not match grid size");
  count_ = 0;
  for (char m : mask_) count_ += (m != 0);
}

CellSet CellSet::empty(const Grid& grid) { return CellSet(grid, std::vector<char>(grid.size(), 0)); }

CellSet CellSet::box(const Grid& grid, const Point& lower, const Point& upper) {
  return from_predicate(grid, [&](const Point& x) {
    for (int a = 0; a < grid.dim(); ++a)
      if (x[a] < lower[a] || x[a] > upper[a]) return false;
    return true;
  });
}

CellSet CellSet::from_predicate(const Grid& grid, const std::function<bool(const Point&)>& pred) {
  std::vector<char> mask(grid.size(), 0);
  for (long i = 0; i < grid.size(); ++i) mask[i] = pred(grid.center(i)) ? 1 : 0;
  return CellSet(grid, std::move(mask));
}

GridFunction CellSet::indicator() const {
  Eigen::VectorXd v(grid_.size());
  for (long i = 0; i < grid_.size(); ++i) v[i] = mask_[i] ? 1.0 : 0.0;
  return GridFunction(grid_, std::move(v), true);
}

CellSet CellSet::set_union(const CellSet& other) const {
  std::vector<char> m(mask_.size());
  for (size_t i = 0; i < m.size(); ++i) m[i] = (mask_[i] || other.mask_[i]) ? 1 : 0;
  return CellSet(grid_, std::move(m));
}

CellSet CellSet::set_difference(const CellSet& other) const {
  std::vector<char> m(mask_.size());
  for (size_t i = 0; i < m.size(); ++i) m[i] = (mask_[i] && !other.mask_[i]) ? 1 : 0;
  return CellSet(grid_, std::move(m));
}

ExponentTriple ExponentTriple::from_pq(double p, double q, double alpha, int dim) {
  const double inv_r = 1.0 / p + 1.0 / q - alpha / dim;
  if (!(inv_r > 0.0)) throw std::invalid_argument("exponents give non-positive 1/r");
  return ExponentTriple{p, q, 1.0 / inv_r, alpha, dim};
}

bool ExponentTriple::scaling_consistent(double tol) const { return std::abs(scaling_defect()) <= tol; }

double integral(const GridFunction& f) {
  CompensatedSum<> s;
  for (long i = 0; i < f.values().size(); ++i) s.add(f[i]);
  return s.value() * f.grid().cell_volume();
}

double lebesgue_norm(const GridFunction& f, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("Lebesgue exponent must be positive");
  const auto& v = f.values();
  if (std::isinf(p)) return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  CompensatedSum<> s;
  if (p == 1.0) {
    for (long i = 0; i < v.size(); ++i) s.add(std::abs(v[i]));
  } else if (p == 2.0) {
    for (long i = 0; i < v.size(); ++i) s.add(v[i] * v[i]);
  } else {
    for (long i = 0; i < v.size(); ++i) s.add(std::pow(std::abs(v[i]), p));
  }
  return std::pow(s.value() * f.grid().cell_volume(), 1.0 / p);
}

namespace {

// Nonzero |f| values sorted in decreasing order.
std::vector<double> sorted_magnitudes(const GridFunction& f) {
  std::vector<double> m;
  m.reserve(f.values().size());
  for (long i = 0; i < f.values().size(); ++i) {
    const double a = std::abs(f[i]);
    if (a > 0.0) m.push_back(a);
  }
  std::sort(m.begin(), m.end(), std::greater<>());
  return m;
}

}  // namespace

double weak_norm(const GridFunction& f, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("weak exponent must be positive");
  const auto m = sorted_magnitudes(f);
  const double hd = f.grid().cell_volume();
  double best = 0.0;
  size_t k = 0;
  while (k < m.size()) {
    const double level = m[k];
    while (k < m.size() && m[k] == level) ++k;
    best = std::max(best, level * std::pow(static_cast<double>(k) * hd, 1.0 / r));
  }
  return best;
}

double weak_norm_upper(const GridFunction& f, double r, double s) {
  if (!(s > 0.0) || !(r > s)) throw std::invalid_argument("weak_norm_upper needs 0 < s < r");
  const auto m = sorted_magnitudes(f);
  const double hd = f.grid().cell_volume();
  double best = 0.0;
  CompensatedSum<> acc;
  size_t k = 0;
  while (k < m.size()) {
    const double level = m[k];
    while (k < m.size() && m[k] == level) acc.add(std::pow(m[k++], s));
    const double measure = static_cast<double>(k) * hd;
    const double value = std::pow(measure, -1.0 / s + 1.0 / r) * std::pow(acc.value() * hd, 1.0 / s);
    best = std::max(best, value);
  }
  return best;
}

GridFunction dyadic_dilate(const GridFunction& f, int k) {
  const Grid& g = f.grid();
  if (k == 0) return f;
  const long n = g.cells_per_axis();
  const long factor = 1L << std::abs(k);
  if (n % factor != 0) throw std::invalid_argument("dyadic_dilate needs N divisible by 2^|k|");
  const int d = g.dim();
  const double scale = std::ldexp(1.0, k);
  // Cell edge i maps to edge position scale*i + shift[a] in cell units.
  std::array<long, kMaxDim> shift_num{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    const double shift = (scale - 1.0) * g.origin()[a] / g.spacing();
    const double scaled = k > 0 ? shift : shift * static_cast<double>(factor);
    const double rounded = std::round(scaled);
    if (std::abs(scaled - rounded) > 1e-9)
      throw std::invalid_argument("dyadic_dilate needs the dilation to map cell edges onto cell edges");
    shift_num[a] = static_cast<long>(rounded);
  }
  auto wrap = [&](long i, int a, bool& inside) {
    if (g.periodic(a)) return ((i % n) + n) % n;
    inside = inside && i >= 0 && i < n;
    return i;
  };
  Eigen::VectorXd out(g.size());
  for (long lin = 0; lin < g.size(); ++lin) {
    const MultiIndex idx = g.unravel(lin);
    std::array<long, kMaxDim> first{0, 0, 0};
    for (int a = 0; a < d; ++a) {
      // k > 0: the image covers `factor` consecutive cells.
      // k < 0: the image lies inside a single cell.
      if (k > 0) {
        first[a] = factor * idx[a] + shift_num[a];
      } else {
        const long num = idx[a] + shift_num[a];
        first[a] = num >= 0 ? num / factor : -((-num + factor - 1) / factor);
      }
    }
    if (k < 0) {
      bool inside = true;
      MultiIndex src{0, 0, 0};
      for (int a = 0; a < d; ++a) src[a] = wrap(first[a], a, inside);
      out[lin] = inside ? f(src) : 0.0;
      continue;
    }
    long cells = 1;
    for (int a = 0; a < d; ++a) cells *= factor;
    CompensatedSum<> s;
    for (long c = 0; c < cells; ++c) {
      long rem = c;
      bool inside = true;
      MultiIndex src{0, 0, 0};
      for (int a = d - 1; a >= 0; --a) {
        src[a] = wrap(first[a] + rem % factor, a, inside);
        rem /= factor;
      }
      if (inside) s.add(f(src));
    }
    out[lin] = s.value() / static_cast<double>(cells);
  }
  return GridFunction(g, std::move(out), f.nonneg_hint());
}

GridFunction rescale_dilate(const GridFunction& f, int k) {
  const Grid& g = f.grid();
  const double scale = std::ldexp(1.0, -k);
  Grid shrunk(g.dim(), g.cells_per_axis(), g.origin() * scale, g.spacing() * scale, g.periodic_flags());
  return GridFunction(shrunk, f.values(), f.nonneg_hint());
}

}  // namespace riesz
