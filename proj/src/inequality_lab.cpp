#include "riesz/inequality_lab.hpp"

#include "riesz/operators.hpp"
#include "riesz/summation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace riesz {

InequalityReport finish_report(InequalityReport r) {
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : (r.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  const bool finite = std::isfinite(r.lhs) && std::isfinite(r.rhs);
  if (r.asserted) {
    r.passed = finite && r.lhs <= r.tracked_constant * r.rhs * (1.0 + 1e-12);
  } else {
    r.passed = finite;
  }
  return r;
}

nlohmann::json to_json(const InequalityReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["tracked_constant"] = r.tracked_constant;
  j["ratio"] = r.ratio;
  j["params"] = r.params;
  j["inputs"] = r.inputs;
  j["seed"] = r.seed;
  j["asserted"] = r.asserted;
  j["passed"] = r.passed;
  return j;
}

void write_reports_csv(const std::filesystem::path& path, const std::vector<InequalityReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::string> keys;
  for (const auto& r : reports)
    for (const auto& [k, v] : r.params)
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  out << "name,lhs,rhs,tracked_constant,ratio,asserted,passed,seed,inputs";
  for (const auto& k : keys) out << ',' << k;
  out << '\n';
  out.precision(17);
  for (const auto& r : reports) {
    out << r.name << ',' << r.lhs << ',' << r.rhs << ',' << r.tracked_constant << ',' << r.ratio << ','
        << r.asserted << ',' << r.passed << ',' << r.seed << ",\"" << r.inputs << '"';
    for (const auto& k : keys) {
      out << ',';
      if (auto it = r.params.find(k); it != r.params.end()) out << it->second;
    }
    out << '\n';
  }
}

bool all_passed(const std::vector<InequalityReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed; });
}

double unit_ball_measure(int dim) {
  return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

ProofConstants ProofConstants::make(double alpha, int dim) {
  if (!(alpha > 0.0 && alpha < dim)) throw std::invalid_argument("alpha must lie in (0, d)");
  ProofConstants c;
  c.dim = dim;
  c.alpha = alpha;
  c.c_auxI = std::pow(3.0, dim) * std::pow(5.0, 2.0 * dim);
  c.nu_d = unit_ball_measure(dim);
  c.c_est = std::max(c.c_auxI, c.nu_d);
  const double s1 = 1.0 / (1.0 - std::pow(2.0, -alpha / 2.0));
  const double s2 = 1.0 / (1.0 - std::pow(2.0, (alpha - dim) / 2.0));
  c.c_A1 = (s1 + s2) * (s1 + s2);
  c.c_A2 = 1.0 / (1.0 - std::pow(2.0, -alpha)) + 1.0 / (1.0 - std::pow(2.0, alpha - dim));
  c.prefactor = std::pow(2.0, dim - alpha);
  return c;
}

double ProofConstants::c_auxIj2(int j) const { return std::pow(2.0, dim * j) * c_auxI; }

double ProofConstants::c_rest(int k) const {
  if (k < 1 || k > 4) throw std::out_of_range("restricted estimate index must be 1..4");
  return prefactor * c_est * (k == 4 ? c_A2 : c_A1) * weak_conversion;
}

namespace {

double dot_integral(const GridFunction& f, const GridFunction& g) {
  CompensatedSum<> s;
  for (long i = 0; i < f.values().size(); ++i) s.add(f[i] * g[i]);
  return s.value() * f.grid().cell_volume();
}

std::string describe(const GridFunction& f) {
  return "N=" + std::to_string(f.grid().cells_per_axis()) + " d=" + std::to_string(f.grid().dim()) +
         " L1=" + std::to_string(lebesgue_norm(f, 1.0));
}

}  // namespace

InequalityReport hls_check(const GridFunction& f, const GridFunction& g, double alpha, double p, double q) {
  const int d = f.grid().dim();
  if (!(p > 1.0 && q > 1.0)) throw std::invalid_argument("HLS needs p, q > 1");
  if (std::abs(1.0 / p + 1.0 / q - 1.0 - alpha / d) > 1e-12)
    throw std::invalid_argument("HLS needs 1/p + 1/q = 1 + alpha/d");
  InequalityReport r;
  r.name = "hls";
  r.lhs = std::abs(dot_integral(f, riesz_potential(g, alpha)));
  r.rhs = lebesgue_norm(f, p) * lebesgue_norm(g, q);
  r.tracked_constant = std::numeric_limits<double>::infinity();
  r.asserted = false;
  r.params = {{"alpha", alpha}, {"d", d}, {"p", p}, {"q", q}};
  r.inputs = "f: " + describe(f) + "; g: " + describe(g);
  return finish_report(r);
}

InequalityReport aux_unit_check(const GridFunction& f, const GridFunction& g, double theta) {
  const int d = f.grid().dim();
  const auto c = ProofConstants::make(0.5, d);
  InequalityReport r;
  r.name = "aux_unit_half";
  r.lhs = lebesgue_norm(truncated_unit(f, g, theta), 0.5);
  r.rhs = lebesgue_norm(f, 1.0) * lebesgue_norm(g, 1.0);
  r.tracked_constant = c.c_auxI;
  r.params = {{"d", d}, {"theta", theta}};
  r.inputs = "f: " + describe(f) + "; g: " + describe(g);
  return finish_report(r);
}

std::vector<InequalityReport> aux_dyadic_checks(const GridFunction& f, const GridFunction& g, double theta, int j) {
  return aux_dyadic_checks_range(f, g, theta, j, j);
}

std::vector<InequalityReport> aux_dyadic_checks_range(const GridFunction& f, const GridFunction& g, double theta,
                                                      int jmin, int jmax) {
  const int d = f.grid().dim();
  const auto c = ProofConstants::make(0.5, d);
  const auto family = truncated_dyadic_family(f, g, theta, jmin, jmax);
  const double rhs = lebesgue_norm(f, 1.0) * lebesgue_norm(g, 1.0);
  const std::string inputs = "f: " + describe(f) + "; g: " + describe(g);
  std::vector<InequalityReport> out;
  for (int j = jmin; j <= jmax; ++j) {
    const auto& ij = family[j - jmin];
    InequalityReport l1;
    l1.name = "aux_dyadic_L1";
    l1.lhs = lebesgue_norm(ij, 1.0);
    l1.rhs = rhs;
    l1.tracked_constant = c.c_auxIj1;
    l1.params = {{"d", d}, {"theta", theta}, {"j", j}};
    l1.inputs = inputs;
    out.push_back(finish_report(l1));
    InequalityReport half = l1;
    half.name = "aux_dyadic_half";
    half.lhs = lebesgue_norm(ij, 0.5);
    half.tracked_constant = c.c_auxIj2(j);
    out.push_back(finish_report(half));
  }
  return out;
}

std::vector<InequalityReport> annuli_estimate_suite(const CellSet& e, const CellSet& a, const CellSet& b,
                                                    double theta, int j) {
  return annuli_estimate_suite_range(e, a, b, theta, j, j);
}

std::vector<InequalityReport> annuli_estimate_suite_range(const CellSet& e, const CellSet& a, const CellSet& b,
                                                          double theta, int jmin, int jmax) {
  const Grid& grid = a.grid();
  const int d = grid.dim();
  const auto c = ProofConstants::make(0.5, d);
  const auto family = truncated_dyadic_family(a.indicator(), b.indicator(), theta, jmin, jmax);
  const double me = e.measure(), ma = a.measure(), mb = b.measure();
  const std::string inputs =
      "|E|=" + std::to_string(me) + " |A|=" + std::to_string(ma) + " |B|=" + std::to_string(mb);
  std::vector<InequalityReport> out;
  for (int j = jmin; j <= jmax; ++j) {
    const auto& ij = family[j - jmin];
    CompensatedSum<> root, plain;
    for (long i = 0; i < grid.size(); ++i) {
      if (!e.contains(i)) continue;
      root.add(std::sqrt(std::max(0.0, ij[i])));
      plain.add(ij[i]);
    }
    const double half = std::pow(root.value() * grid.cell_volume(), 2.0);
    const double one = plain.value() * grid.cell_volume();
    const double ball = std::pow(2.0, d * j);
    const std::map<std::string, double> params{{"d", d}, {"theta", theta}, {"j", j}};
    auto make = [&](const char* name, double lhs, double rhs) {
      InequalityReport r;
      r.name = name;
      r.lhs = lhs;
      r.rhs = rhs;
      r.tracked_constant = c.c_est;
      r.params = params;
      r.inputs = inputs;
      return finish_report(r);
    };
    out.push_back(make("est1", half, ma * mb * std::min(ball, me)));
    out.push_back(make("est2", half, ma * me * std::min(ball, mb)));
    out.push_back(make("est3", half, mb * me * std::min(ball, ma)));
    out.push_back(make("est4", one, std::min(ball * me, ma * mb)));
  }
  return out;
}

namespace {

// m = max{j : 2^{dj} < a}.
int split_index(double a, int dim) {
  int m = static_cast<int>(std::ceil(std::log2(a) / dim)) - 1;
  while (std::ldexp(1.0, dim * (m + 1)) < a) ++m;
  while (!(std::ldexp(1.0, dim * m) < a)) --m;
  return m;
}

// Sum of a geometric-type series split at m: terms lower(j) for j <= m and
// upper(j) for j > m, both decaying away from m. Each tail stops once the
// next term is below 1e-15 of the partial sum.
template <class Lower, class Upper>
double two_sided_sum(int m, Lower&& lower, Upper&& upper) {
  double s = 0.0;
  for (int j = m;; --j) {
    const double t = lower(j);
    s += t;
    if (t < 1e-15 * s || t == 0.0) break;
  }
  for (int j = m + 1;; ++j) {
    const double t = upper(j);
    s += t;
    if (t < 1e-15 * s || t == 0.0) break;
  }
  return s;
}

}  // namespace

double geometric_sum_A1_inner(double a, double alpha, int dim) {
  if (!(a > 0.0)) throw std::invalid_argument("sum parameter must be positive");
  const int m = split_index(a, dim);
  return two_sided_sum(
      m, [&](int j) { return std::pow(2.0, alpha * j / 2.0); },
      [&](int j) { return std::pow(2.0, (alpha - dim) * j / 2.0) * std::sqrt(a); });
}

SumResult geometric_sum_A1(double a, double alpha, int dim) {
  const auto c = ProofConstants::make(alpha, dim);
  const double inner = geometric_sum_A1_inner(a, alpha, dim);
  SumResult r;
  r.value = inner * inner;
  r.bound = c.c_A1 * std::pow(a, alpha / dim);
  r.passed = r.value <= r.bound * (1.0 + 1e-12);
  return r;
}

SumResult geometric_sum_A2(double a, double b, double alpha, int dim) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("sum parameters must be positive");
  const auto c = ProofConstants::make(alpha, dim);
  // m = max{j : 2^{dj} a < b}.
  const int m = split_index(b / a, dim);
  SumResult r;
  r.value = two_sided_sum(
      m, [&](int j) { return a * std::pow(2.0, alpha * j); },
      [&](int j) { return b * std::pow(2.0, (alpha - dim) * j); });
  r.bound = c.c_A2 * a * std::pow(b / a, alpha / dim);
  r.passed = r.value <= r.bound * (1.0 + 1e-12);
  return r;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs matching samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<InequalityReport> restricted_weak_type_suite(const CellSet& a, const CellSet& b, double alpha,
                                                         double theta) {
  const Grid& grid = a.grid();
  const int d = grid.dim();
  const auto c = ProofConstants::make(alpha, d);
  const double s = alpha / d;
  const auto op = bilinear_op(a.indicator(), b.indicator(), OperatorParams{alpha, theta, d});
  const double ma = a.measure(), mb = b.measure();
  const std::string inputs = "|A|=" + std::to_string(ma) + " |B|=" + std::to_string(mb);
  struct Target {
    const char* name;
    double r, pa, pb;
  };
  const Target targets[4] = {{"rest1", d / (2.0 * d - alpha), 1.0, 1.0},
                             {"rest2", 1.0, 1.0, s},
                             {"rest3", 1.0, s, 1.0},
                             {"rest4", d / alpha, s, s}};
  std::vector<InequalityReport> out;
  for (int k = 0; k < 4; ++k) {
    InequalityReport r;
    r.name = targets[k].name;
    r.lhs = weak_norm(op, targets[k].r);
    r.rhs = std::pow(ma, targets[k].pa) * std::pow(mb, targets[k].pb);
    r.tracked_constant = c.c_rest(k + 1);
    r.params = {{"alpha", alpha}, {"d", d}, {"theta", theta}, {"r", targets[k].r}};
    r.inputs = inputs;
    out.push_back(finish_report(r));
  }
  return out;
}

std::string to_string(SetFamily f) {
  switch (f) {
    case SetFamily::random_cell_unions: return "random-cell-unions";
    case SetFamily::nested_cubes: return "nested-cubes";
    case SetFamily::separated_cubes: return "separated-cubes";
    case SetFamily::annuli: return "annuli";
  }
  return "random-cell-unions";
}

SetFamily set_family_from_string(const std::string& s) {
  for (auto f : {SetFamily::random_cell_unions, SetFamily::nested_cubes, SetFamily::separated_cubes, SetFamily::annuli})
    if (to_string(f) == s) return f;
  throw std::invalid_argument("unknown set family '" + s + "'");
}

SetPairSampler::SetPairSampler(const Grid& grid, SetFamily family, std::uint64_t seed, long window_lo, long window_hi)
    : grid_(grid), family_(family), seed_(seed), rng_(seed), lo_(window_lo), hi_(window_hi) {
  if (window_lo < 0 || window_hi >= grid.cells_per_axis() || window_hi - window_lo < 8)
    throw std::invalid_argument("sampler window must hold at least 8 cells inside the grid");
}

double SetPairSampler::uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

long SetPairSampler::uniform_int(long lo, long hi) {
  return lo + static_cast<long>(std::floor(uniform() * static_cast<double>(hi - lo + 1)));
}

CellSet SetPairSampler::cube(const std::array<long, kMaxDim>& center, long half) const {
  std::vector<char> mask(grid_.size(), 0);
  for (long i = 0; i < grid_.size(); ++i) {
    const MultiIndex idx = grid_.unravel(i);
    bool in = true;
    for (int a = 0; a < grid_.dim(); ++a) {
      const long lo = std::max(lo_, center[a] - half);
      const long hi = std::min(hi_, center[a] + half);
      in = in && idx[a] >= lo && idx[a] <= hi;
    }
    mask[i] = in ? 1 : 0;
  }
  return CellSet(grid_, std::move(mask));
}

CellSet SetPairSampler::random_box_set() {
  const long width = hi_ - lo_ + 1;
  std::array<long, kMaxDim> first{0, 0, 0}, last{0, 0, 0};
  for (int a = 0; a < grid_.dim(); ++a) {
    // Log-uniform side length between 1 cell and half the window.
    const double len = std::exp(uniform() * std::log(0.5 * static_cast<double>(width)));
    const long l = std::max(1L, static_cast<long>(len));
    first[a] = uniform_int(lo_, hi_ - l + 1);
    last[a] = first[a] + l - 1;
  }
  std::vector<char> mask(grid_.size(), 0);
  for (long i = 0; i < grid_.size(); ++i) {
    const MultiIndex idx = grid_.unravel(i);
    bool in = true;
    for (int a = 0; a < grid_.dim(); ++a) in = in && idx[a] >= first[a] && idx[a] <= last[a];
    mask[i] = in ? 1 : 0;
  }
  return CellSet(grid_, std::move(mask));
}

CellSet SetPairSampler::random_union() {
  CellSet s = random_box_set();
  const long extra = uniform_int(0, 3);
  for (long k = 0; k < extra; ++k) s = s.set_union(random_box_set());
  return s;
}

std::pair<CellSet, CellSet> SetPairSampler::next_pair() {
  const long width = hi_ - lo_ + 1;
  std::array<long, kMaxDim> center{0, 0, 0};
  for (int a = 0; a < grid_.dim(); ++a) center[a] = uniform_int(lo_ + width / 4, hi_ - width / 4);
  const long max_half = std::max(2L, width / 8);
  switch (family_) {
    case SetFamily::random_cell_unions:
      return {random_union(), random_union()};
    case SetFamily::nested_cubes: {
      const long inner = uniform_int(0, max_half);
      const long outer = inner + uniform_int(0, max_half);
      if (uniform() < 0.5) return {cube(center, inner), cube(center, outer)};
      return {cube(center, outer), cube(center, inner)};
    }
    case SetFamily::separated_cubes: {
      const long ha = uniform_int(0, max_half / 2), hb = uniform_int(0, max_half / 2);
      const long gap = uniform_int(1, max_half);
      std::array<long, kMaxDim> ca = center, cb = center;
      ca[0] = center[0] - ha - (gap + 1) / 2;
      cb[0] = center[0] + hb + gap / 2 + 1;
      return {cube(ca, ha), cube(cb, hb)};
    }
    case SetFamily::annuli: {
      const long r1 = uniform_int(0, max_half / 2);
      const long r2 = r1 + uniform_int(1, max_half / 2);
      const long r3 = r2 + uniform_int(1, max_half);
      return {cube(center, r1), cube(center, r3).set_difference(cube(center, r2))};
    }
  }
  return {random_union(), random_union()};
}

std::array<CellSet, 3> SetPairSampler::next_triple() {
  CellSet e = random_union();
  auto [a, b] = next_pair();
  return {e, a, b};
}

UniformScanReport uniform_bound_scan(const std::vector<std::pair<GridFunction, GridFunction>>& pairs,
                                     const ExponentTriple& triple, const std::vector<double>& thetas,
                                     double safety_factor, double structural_multiplier) {
  const int d = triple.dim;
  const double alpha = triple.alpha;
  UniformScanReport rep;
  rep.triple = triple;
  rep.safety_factor = safety_factor;
  rep.region = classify_region(1.0 / triple.p, 1.0 / triple.q, alpha, d);
  if (!triple.scaling_consistent()) throw std::domain_error("exponent triple is not scaling-consistent");
  if (rep.region != RegionLabel::interior_square)
    throw std::domain_error("exponent point lies in region " + to_string(rep.region));
  const auto consts = ProofConstants::make(alpha, d).c_rest_all();
  rep.bound = interpolate_bound(1.0 / triple.p, 1.0 / triple.q, alpha, d, consts, structural_multiplier);
  const double limit = safety_factor * rep.bound.constant;
  for (size_t k = 0; k < pairs.size(); ++k) {
    const auto& [f, g] = pairs[k];
    const double rhs = lebesgue_norm(f, triple.p) * lebesgue_norm(g, triple.q);
    for (double th : thetas) {
      ScanRow row;
      row.sample = static_cast<long>(k);
      row.theta = th;
      row.rhs = rhs;
      row.lhs = lebesgue_norm(bilinear_op(f, g, OperatorParams{alpha, th, d}), triple.r);
      row.ratio = rhs > 0.0 ? row.lhs / rhs : 0.0;
      rep.sup_ratio = std::max(rep.sup_ratio, row.ratio);
      if (!(row.ratio <= limit)) rep.passed = false;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

BlowupReport boundary_blowup_probe(const BlowupConfig& cfg) {
  if (cfg.epsilons.empty()) throw std::invalid_argument("blow-up probe needs at least one epsilon");
  const int d = cfg.dim;
  OperatorParams{cfg.alpha, cfg.theta, d}.validate();
  const Grid grid = make_grid(d, cfg.cells, cfg.half_width, false);
  const double q = d / cfg.alpha;
  BlowupReport rep;
  rep.config = cfg;
  for (double eps : cfg.epsilons) {
    BlowupRow row;
    row.epsilon = eps;
    row.inner_radius = cfg.family == BlowupFamily::truncated_log_profile ? std::pow(eps, cfg.radius_power) : 0.0;
    const double s = row.inner_radius;
    const double expo = cfg.alpha / d + cfg.delta;
    const auto g = GridFunction::sample(
        grid,
        [&](const Point& x) {
          const double r = x.norm();
          if (cfg.family == BlowupFamily::smooth_bump) return std::exp(-r * r);
          if (r < s || r > 1.0) return 0.0;
          return std::pow(r, -cfg.alpha) * std::pow(1.0 + std::abs(std::log(r)), -expo);
        },
        true);
    const auto f = GridFunction::sample(
        grid,
        [&](const Point& x) {
          double r2 = 0.0;
          for (int a = 0; a < d; ++a) r2 += (x[a] - cfg.x0) * (x[a] - cfg.x0);
          return std::pow(1.0 / eps, 0.5 * d) * std::exp(-std::numbers::pi * r2 / eps);
        },
        true);
    const auto op = bilinear_op(f, g, OperatorParams{cfg.alpha, cfg.theta, d});
    row.lhs = lebesgue_norm(op, cfg.p);
    row.f_norm = lebesgue_norm(f, cfg.p);
    row.g_norm = lebesgue_norm(g, q);
    row.ratio = row.lhs / (row.f_norm * row.g_norm);
    rep.rows.push_back(row);
  }
  rep.growth = rep.rows.back().ratio / rep.rows.front().ratio;
  rep.monotone = true;
  double lo = rep.rows.front().ratio, hi = lo;
  for (size_t k = 1; k < rep.rows.size(); ++k) {
    rep.monotone = rep.monotone && rep.rows[k].ratio > rep.rows[k - 1].ratio;
    lo = std::min(lo, rep.rows[k].ratio);
    hi = std::max(hi, rep.rows[k].ratio);
  }
  rep.max_relative_spread = (hi - lo) / lo;
  return rep;
}

}  // namespace riesz
