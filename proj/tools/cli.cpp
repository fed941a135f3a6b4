#include "cli.hpp"

#include "riesz/euler_riesz.hpp"
#include "riesz/grid_io.hpp"
#include "riesz/inequality_lab.hpp"
#include "riesz/interpolation.hpp"
#include "riesz/operators.hpp"
#include "riesz/relative_energy.hpp"
#include "riesz/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace riesz::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Output {
  fs::path dir;
  std::vector<std::string> files;

  fs::path file(const std::string& name) {
    files.push_back(name);
    return dir / name;
  }
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void apply_thread_env() {
  const char* env = std::getenv("RIESZ_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw UsageError("RIESZ_THREADS must be a positive integer");
#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(n));
#endif
}

// Values from a JSON config fill options not given on the command line.
void merge_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt || key == "config") throw UsageError("unknown config key '" + key + "'");
    if (opt->count() > 0) continue;
    auto as_string = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(as_string(v));
    } else {
      opt->add_result(as_string(value));
    }
    opt->run_callback();
  }
}

json effective_config(const CLI::App* sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "config" || name == "out") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      cfg[name] = r.size() == 1 ? json(r.front()) : json(r);
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

void write_manifest(const Output& out, const std::string& subcommand, const json& config, std::uint64_t seed,
                    int exit_code) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(config.dump())));
  json m;
  m["subcommand"] = subcommand;
  m["config"] = config;
  m["config_hash"] = hash;
  m["seed"] = seed;
  m["version"] = kVersion;
  m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  m["threads"] = thread_count();
  m["outputs"] = out.files;
  m["exit_code"] = exit_code;
  std::ofstream(out.dir / "manifest.json") << m.dump(2) << '\n';
}

void write_json(const fs::path& path, const json& j) { std::ofstream(path) << j.dump(2) << '\n'; }

// Columns of equal length with a header row.
void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.precision(17);
  for (size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  const size_t rows = columns.empty() ? 0 : columns.front().size();
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c][r];
    out << '\n';
  }
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void write_field_csv(const fs::path& path, const Grid& grid, const std::vector<std::string>& names,
                     const std::vector<Eigen::VectorXd>& values) {
  std::vector<std::string> header;
  std::vector<std::vector<double>> cols(grid.dim());
  for (int a = 0; a < grid.dim(); ++a) header.push_back("x" + std::to_string(a));
  for (long i = 0; i < grid.size(); ++i) {
    const Point x = grid.center(i);
    for (int a = 0; a < grid.dim(); ++a) cols[a].push_back(x[a]);
  }
  for (size_t k = 0; k < names.size(); ++k) {
    header.push_back(names[k]);
    cols.push_back(to_std(values[k]));
  }
  write_csv(path, header, cols);
}

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("bad number '" + item + "' in '" + s + "'");
    }
  }
  return out;
}

// indicator:a,b | gaussian:s | bump:r | cosine | file:PATH
GridFunction parse_input(const std::string& spec, const Grid& grid) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "file") return read_grid_function(arg);
  const std::vector<double> v = arg.empty() ? std::vector<double>{} : parse_numbers(arg);
  if (kind == "indicator") {
    if (v.size() != 2 || !(v[0] < v[1])) throw UsageError("indicator needs lower,upper");
    Point lo = Point::Constant(grid.dim(), v[0]), hi = Point::Constant(grid.dim(), v[1]);
    return CellSet::box(grid, lo, hi).indicator();
  }
  if (kind == "gaussian") {
    const double s = v.empty() ? 1.0 : v[0];
    return GridFunction::sample(grid, [=](const Point& x) { return std::exp(-x.squaredNorm() / (s * s)); }, true);
  }
  if (kind == "bump") {
    const double r = v.empty() ? 1.0 : v[0];
    return GridFunction::sample(
        grid, [=](const Point& x) { return std::pow(std::max(0.0, 1.0 - x.squaredNorm() / (r * r)), 2); }, true);
  }
  if (kind == "cosine") {
    return GridFunction::sample(
        grid,
        [](const Point& x) {
          double c = 1.0;
          for (int a = 0; a < x.size(); ++a) c *= std::cos(2.0 * std::numbers::pi * x[a]);
          return 1.0 + 0.5 * c;
        },
        true);
  }
  throw UsageError("unknown input '" + spec + "'");
}

std::vector<double> theta_grid(int count) {
  if (count < 2) throw UsageError("theta grid needs at least two points");
  std::vector<double> t(count);
  for (int k = 0; k < count; ++k) t[k] = static_cast<double>(k) / (count - 1);
  return t;
}

FdScheme fd_scheme(const std::string& s) {
  if (s == "centered2") return FdScheme::centered2;
  if (s == "centered4") return FdScheme::centered4;
  throw UsageError("unknown difference scheme '" + s + "'");
}

// Options shared by the set-sampling subcommands.
struct LabGrid {
  int dim = 1;
  long cells = 2048;
  double half_width = 32.0;
  double window = 8.0;
  std::string family = "random-cell-unions";
  long samples = 100;
  int theta_count = 11;

  void add(CLI::App* sub) {
    sub->add_option("--d", dim, "dimension")->check(CLI::Range(1, 3));
    sub->add_option("--N", cells, "cells per axis");
    sub->add_option("--half-width", half_width, "grid covers [-a, a]^d");
    sub->add_option("--window", window, "sets live in [-w, w]^d");
    sub->add_option("--family", family, "set family")
        ->check(CLI::IsMember({"random-cell-unions", "nested-cubes", "separated-cubes", "annuli"}));
    sub->add_option("--samples", samples, "number of sampled sets");
    sub->add_option("--theta-count", theta_count, "points of the uniform theta grid on [0, 1]");
  }

  Grid grid() const { return make_grid(dim, cells, half_width, false); }

  SetPairSampler sampler(const Grid& g, std::uint64_t seed) const {
    const double h = g.spacing();
    const long lo = static_cast<long>(std::floor((half_width - window) / h));
    const long hi = static_cast<long>(std::ceil((half_width + window) / h)) - 1;
    return SetPairSampler(g, set_family_from_string(family), seed, std::max(0L, lo), std::min(cells - 1, hi));
  }
};

json report_summary(const std::vector<InequalityReport>& reports) {
  std::map<std::string, json> by_name;
  for (const auto& r : reports) {
    json& e = by_name[r.name];
    if (e.is_null()) e = {{"checks", 0}, {"violations", 0}, {"max_ratio_over_constant", 0.0}};
    e["checks"] = e["checks"].get<long>() + 1;
    if (!r.passed) e["violations"] = e["violations"].get<long>() + 1;
    if (r.asserted && r.tracked_constant > 0.0)
      e["max_ratio_over_constant"] = std::max(e["max_ratio_over_constant"].get<double>(), r.ratio / r.tracked_constant);
  }
  json out = json::object();
  for (auto& [k, v] : by_name) out[k] = v;
  out["all_passed"] = all_passed(reports);
  return out;
}

void tag(std::vector<InequalityReport>& reports, size_t from, long sample, std::uint64_t seed) {
  for (size_t k = from; k < reports.size(); ++k) {
    reports[k].params["sample"] = static_cast<double>(sample);
    reports[k].seed = seed;
  }
}

// Subcommand handlers return 0 or 1; errors throw.

struct OpEval {
  std::string op = "bilinear", f = "indicator:0,1", g;
  long cells = 256;
  int dim = 1;
  double alpha = 0.5, theta = 0.5, half_width = 2.0;
  int j = 0, theta_count = 16;
  bool periodic = false;

  void add(CLI::App* s) {
    s->add_option("--op", op, "operator")
        ->check(CLI::IsMember({"riesz", "bilinear", "unit", "dyadic", "envelope", "tensor-J", "tensor-S",
                               "force-direct", "force-divergence"}));
    s->add_option("--f", f, "first input (indicator:a,b | gaussian:s | bump:r | cosine | file:PATH)");
    s->add_option("--g", g, "second input (defaults to f)");
    s->add_option("--N", cells, "cells per axis");
    s->add_option("--d", dim, "dimension")->check(CLI::Range(1, 3));
    s->add_option("--alpha", alpha, "order alpha in (0, d)");
    s->add_option("--theta", theta, "shear parameter in [0, 1]");
    s->add_option("--half-width", half_width, "grid covers [-a, a]^d");
    s->add_option("--j", j, "dyadic scale for --op dyadic");
    s->add_option("--theta-count", theta_count, "Gauss points in theta for tensors");
    s->add_flag("--periodic", periodic, "periodic grid");
  }

  int run(Output& out) const {
    const Grid grid = make_grid(dim, cells, half_width, periodic);
    const GridFunction fv = parse_input(f, grid);
    const GridFunction gv = g.empty() ? fv : parse_input(g, fv.grid());
    const OperatorParams params{alpha, theta, fv.grid().dim()};
    const ThetaQuadrature tq = ThetaQuadrature::make(ThetaRule::gauss_legendre, theta_count);
    std::vector<std::string> names;
    std::vector<Eigen::VectorXd> values;
    if (op == "riesz") {
      names = {"value"};
      values = {riesz_potential(gv, alpha).values()};
    } else if (op == "bilinear") {
      names = {"value"};
      values = {bilinear_op(fv, gv, params).values()};
    } else if (op == "unit") {
      names = {"value"};
      values = {truncated_unit(fv, gv, theta).values()};
    } else if (op == "dyadic") {
      names = {"value"};
      values = {truncated_dyadic(fv, gv, theta, j).values()};
    } else if (op == "envelope") {
      names = {"value"};
      values = {dyadic_envelope(fv, gv, params, default_dyadic_range(fv.grid())).values()};
    } else if (op == "tensor-J" || op == "tensor-S") {
      const SymTensorField t = op == "tensor-J" ? tensor_J(fv, gv, params, tq) : tensor_S(fv, params, tq);
      for (const auto& c : t.channels(op == "tensor-J" ? "J" : "S")) {
        names.push_back(c.name);
        values.push_back(c.values);
      }
    } else {
      const VectorField v = op == "force-direct" ? interaction_force_direct(fv, params)
                                                 : interaction_force_divergence(fv, params, tq, FdScheme::centered2);
      for (int a = 0; a < v.dim(); ++a) {
        names.push_back("F" + std::to_string(a));
        values.push_back(v.components[a]);
      }
    }
    write_field_csv(out.file("op_eval.csv"), fv.grid(), names, values);
    std::vector<GridChannel> channels;
    for (size_t k = 0; k < names.size(); ++k) channels.push_back({names[k], values[k]});
    write_grid_file(out.file("op_eval.grid"), fv.grid(), channels);
    return 0;
  }
};

struct IdentityCheck {
  std::vector<long> cells{128, 256, 512};
  int dim = 1, theta_count = 16;
  double alpha = 0.5, min_order = 1.8;
  std::string scheme = "centered2";

  void add(CLI::App* s) {
    s->add_option("--N", cells, "resolutions (comma separated)")->delimiter(',');
    s->add_option("--d", dim, "dimension")->check(CLI::Range(1, 2));
    s->add_option("--alpha", alpha, "order alpha in (0, d)");
    s->add_option("--scheme", scheme, "divergence stencil")->check(CLI::IsMember({"centered2", "centered4"}));
    s->add_option("--theta-count", theta_count, "Gauss points in theta");
    s->add_option("--min-order", min_order, "required observed order per doubling");
  }

  int run(Output& out, std::ostream& log) const {
    if (cells.size() < 2) throw UsageError("identity-check needs at least two resolutions");
    const ThetaQuadrature tq = ThetaQuadrature::make(ThetaRule::gauss_legendre, theta_count);
    std::vector<double> ns, gaps, orders;
    bool ok = true;
    for (size_t k = 0; k < cells.size(); ++k) {
      const Grid grid = make_grid(dim, cells[k], 0.5, true);
      const GridFunction rho = parse_input("cosine", grid);
      const double gap = force_form_gap(rho, OperatorParams{alpha, 0.0, dim}, tq, fd_scheme(scheme));
      const double order = k ? std::log2(gaps.back() / gap) / std::log2(double(cells[k]) / double(cells[k - 1]))
                             : std::nan("");
      if (k && !(order >= min_order)) ok = false;
      ns.push_back(static_cast<double>(cells[k]));
      gaps.push_back(gap);
      orders.push_back(order);
      log << "N=" << cells[k] << " gap=" << gap << (k ? " order=" + std::to_string(order) : "") << '\n';
    }
    write_csv(out.file("identity_check.csv"), {"N", "relative_l2_gap", "order"}, {ns, gaps, orders});
    write_json(out.file("identity_check.json"), {{"N", cells}, {"gap", gaps}, {"passed", ok}});
    return ok ? 0 : 1;
  }
};

struct Hls {
  std::string f = "gaussian:1", g = "indicator:-1,1";
  long cells = 512;
  int dim = 1;
  double alpha = 0.5, p = 1.5, half_width = 4.0;

  void add(CLI::App* s) {
    s->add_option("--f", f, "first input");
    s->add_option("--g", g, "second input");
    s->add_option("--N", cells, "cells per axis");
    s->add_option("--d", dim, "dimension")->check(CLI::Range(1, 3));
    s->add_option("--alpha", alpha, "order alpha in (0, d)");
    s->add_option("--p", p, "exponent of f; q follows from 1/p + 1/q = 1 + alpha/d");
    s->add_option("--half-width", half_width, "grid covers [-a, a]^d");
  }

  int run(Output& out) const {
    const Grid grid = make_grid(dim, cells, half_width, false);
    const double q = 1.0 / (1.0 + alpha / dim - 1.0 / p);
    const auto r = hls_check(parse_input(f, grid), parse_input(g, grid), alpha, p, q);
    write_reports_csv(out.file("hls.csv"), {r});
    write_json(out.file("hls.json"), to_json(r));
    return 0;
  }
};

struct AuxLemmas {
  LabGrid lab;
  int jmin = -4, jmax = 4;

  void add(CLI::App* s) {
    lab.add(s);
    s->add_option("--jmin", jmin, "smallest dyadic scale");
    s->add_option("--jmax", jmax, "largest dyadic scale");
  }

  int run(Output& out, std::uint64_t seed, bool annuli) const {
    const Grid grid = lab.grid();
    SetPairSampler sampler = lab.sampler(grid, seed);
    std::vector<InequalityReport> reports;
    for (long k = 0; k < lab.samples; ++k) {
      const auto [e, a, b] = sampler.next_triple();
      for (double th : theta_grid(lab.theta_count)) {
        const size_t from = reports.size();
        if (annuli) {
          for (auto& r : annuli_estimate_suite_range(e, a, b, th, jmin, jmax)) reports.push_back(r);
        } else {
          const GridFunction fa = a.indicator(), fb = b.indicator();
          reports.push_back(aux_unit_check(fa, fb, th));
          for (auto& r : aux_dyadic_checks_range(fa, fb, th, jmin, jmax)) reports.push_back(r);
        }
        tag(reports, from, k, seed);
      }
    }
    const std::string stem = annuli ? "annuli" : "aux_lemmas";
    write_reports_csv(out.file(stem + ".csv"), reports);
    write_json(out.file(stem + ".json"), report_summary(reports));
    return all_passed(reports) ? 0 : 1;
  }
};

struct Sums {
  double alpha = 0.5, slope_tol = 0.05;
  int dim = 1, kmin = -10, kmax = 10;

  void add(CLI::App* s) {
    s->add_option("--alpha", alpha, "order alpha in (0, d)");
    s->add_option("--d", dim, "dimension")->check(CLI::Range(1, 3));
    s->add_option("--kmin", kmin, "smallest exponent k of a = 2^k and b/a = 2^k");
    s->add_option("--kmax", kmax, "largest exponent");
    s->add_option("--slope-tol", slope_tol, "allowed deviation of fitted exponents from alpha/d");
  }

  int run(Output& out, std::ostream& log) const {
    std::vector<double> kind, as, bs, values, bounds, passed;
    std::vector<double> a1x, a1y, a2x, a2y;
    bool ok = true;
    for (int k = kmin; k <= kmax; ++k) {
      const double a = std::ldexp(1.0, k);
      const SumResult r = geometric_sum_A1(a, alpha, dim);
      kind.push_back(1);
      as.push_back(a);
      bs.push_back(std::nan(""));
      values.push_back(r.value);
      bounds.push_back(r.bound);
      passed.push_back(r.passed);
      ok = ok && r.passed;
      a1x.push_back(a);
      a1y.push_back(r.value);
      for (int l = kmin; l <= kmax; ++l) {
        const double b = a * std::ldexp(1.0, l);
        const SumResult s = geometric_sum_A2(a, b, alpha, dim);
        kind.push_back(2);
        as.push_back(a);
        bs.push_back(b);
        values.push_back(s.value);
        bounds.push_back(s.bound);
        passed.push_back(s.passed);
        ok = ok && s.passed;
        if (k == 0) {
          a2x.push_back(b / a);
          a2y.push_back(s.value / a);
        }
      }
    }
    const double s1 = loglog_slope(a1x, a1y), s2 = loglog_slope(a2x, a2y);
    const double target = alpha / dim;
    const bool slopes_ok = std::abs(s1 - target) <= slope_tol && std::abs(s2 - target) <= slope_tol;
    log << "A1 slope " << s1 << ", A2 slope " << s2 << ", target " << target << '\n';
    write_csv(out.file("sums.csv"), {"sum", "a", "b", "value", "bound", "passed"},
              {kind, as, bs, values, bounds, passed});
    write_json(out.file("sums.json"), {{"slope_A1", s1},
                                       {"slope_A2", s2},
                                       {"target", target},
                                       {"bounds_passed", ok},
                                       {"slopes_passed", slopes_ok}});
    return ok && slopes_ok ? 0 : 1;
  }
};

struct Restricted {
  LabGrid lab;
  double alpha = 0.5;

  void add(CLI::App* s) {
    lab.samples = 50;
    lab.add(s);
    s->add_option("--alpha", alpha, "order alpha in (0, d)");
  }

  int run(Output& out, std::uint64_t seed) const {
    const Grid grid = lab.grid();
    SetPairSampler sampler = lab.sampler(grid, seed);
    std::vector<InequalityReport> reports;
    std::map<std::string, double> uniformity;
    for (long k = 0; k < lab.samples; ++k) {
      const auto [a, b] = sampler.next_pair();
      std::map<std::string, std::pair<double, double>> span;
      for (double th : theta_grid(lab.theta_count)) {
        const size_t from = reports.size();
        for (auto& r : restricted_weak_type_suite(a, b, alpha, th)) {
          auto [it, fresh] = span.try_emplace(r.name, r.ratio, r.ratio);
          it->second.first = std::min(it->second.first, r.ratio);
          it->second.second = std::max(it->second.second, r.ratio);
          reports.push_back(r);
        }
        tag(reports, from, k, seed);
      }
      for (const auto& [name, mm] : span)
        if (mm.first > 0.0) uniformity[name] = std::max(uniformity[name], mm.second / mm.first);
    }
    write_reports_csv(out.file("restricted.csv"), reports);
    json summary = report_summary(reports);
    summary["max_over_min_theta_ratio"] = uniformity;
    write_json(out.file("restricted.json"), summary);
    return all_passed(reports) ? 0 : 1;
  }
};

struct UniformScan {
  LabGrid lab;
  double alpha = 0.5, p = 1.2, q = 1.2, safety = 10.0, structural = 1.0;
  int dilation_samples = 5, dilation = 1;

  void add(CLI::App* s) {
    lab.add(s);
    s->add_option("--alpha", alpha, "order alpha in (0, d)");
    s->add_option("--p", p, "exponent of f");
    s->add_option("--q", q, "exponent of g");
    s->add_option("--safety", safety, "allowed factor over the interpolated constant");
    s->add_option("--structural", structural, "structural multiplier of the interpolation theorem");
    s->add_option("--dilation-samples", dilation_samples, "pairs re-measured after dilation");
    s->add_option("--dilation", dilation, "dilation exponent k in x -> 2^k x");
  }

  int run(Output& out, std::uint64_t seed, std::ostream& log) const {
    const Grid grid = lab.grid();
    SetPairSampler sampler = lab.sampler(grid, seed);
    std::vector<std::pair<GridFunction, GridFunction>> pairs;
    for (long k = 0; k < lab.samples; ++k) {
      const auto [a, b] = sampler.next_pair();
      pairs.emplace_back(a.indicator(), b.indicator());
    }
    const ExponentTriple triple = ExponentTriple::from_pq(p, q, alpha, lab.dim);
    const std::vector<double> thetas = theta_grid(lab.theta_count);
    const UniformScanReport rep = uniform_bound_scan(pairs, triple, thetas, safety, structural);

    double dilation_error = 0.0;
    const long nd = std::min<long>(dilation_samples, static_cast<long>(pairs.size()));
    std::vector<std::pair<GridFunction, GridFunction>> dilated;
    for (long k = 0; k < nd; ++k)
      dilated.emplace_back(rescale_dilate(pairs[k].first, dilation), rescale_dilate(pairs[k].second, dilation));
    if (nd > 0) {
      const UniformScanReport drep = uniform_bound_scan(dilated, triple, thetas, safety, structural);
      for (size_t r = 0; r < drep.rows.size(); ++r) {
        const double base = rep.rows[r].ratio;
        if (base > 0.0) dilation_error = std::max(dilation_error, std::abs(drep.rows[r].ratio - base) / base);
      }
    }
    const bool dilation_ok = dilation_error <= 1e-6;

    std::vector<double> sample, theta, ratio, lhs, rhs;
    for (const auto& r : rep.rows) {
      sample.push_back(static_cast<double>(r.sample));
      theta.push_back(r.theta);
      ratio.push_back(r.ratio);
      lhs.push_back(r.lhs);
      rhs.push_back(r.rhs);
    }
    write_csv(out.file("uniform_scan.csv"), {"sample", "theta", "ratio", "lhs", "rhs"}, {sample, theta, ratio, lhs, rhs});
    write_json(out.file("uniform_scan.json"), {{"p", p},
                                               {"q", q},
                                               {"r", triple.r},
                                               {"region", to_string(rep.region)},
                                               {"interpolated_constant", rep.bound.constant},
                                               {"safety", safety},
                                               {"sup_ratio", rep.sup_ratio},
                                               {"bound_passed", rep.passed},
                                               {"dilation_max_relative_change", dilation_error},
                                               {"dilation_passed", dilation_ok}});
    log << "sup ratio " << rep.sup_ratio << " vs " << safety << " x " << rep.bound.constant << '\n';
    return rep.passed && dilation_ok ? 0 : 1;
  }
};

struct Blowup {
  BlowupConfig cfg;
  std::string family = "truncated-log-profile";
  double min_growth = 2.0, max_spread = 0.05;

  void add(CLI::App* s) {
    s->add_option("--family", family, "input family for g")
        ->check(CLI::IsMember({"truncated-log-profile", "smooth-bump"}));
    s->add_option("--alpha", cfg.alpha, "order alpha in (0, d)");
    s->add_option("--d", cfg.dim, "dimension")->check(CLI::Range(1, 2));
    s->add_option("--p", cfg.p, "exponent of f");
    s->add_option("--theta", cfg.theta, "shear parameter");
    s->add_option("--eps", cfg.epsilons, "concentration scales of f (comma separated)")->delimiter(',');
    s->add_option("--x0", cfg.x0, "center of f");
    s->add_option("--N", cfg.cells, "cells per axis");
    s->add_option("--half-width", cfg.half_width, "grid covers [-a, a]^d");
    s->add_option("--delta", cfg.delta, "extra log decay of the profile");
    s->add_option("--radius-power", cfg.radius_power, "inner radius of the profile is eps^power");
    s->add_option("--min-growth", min_growth, "required ratio growth for the profile family");
    s->add_option("--max-spread", max_spread, "allowed relative spread for the smooth family");
  }

  int run(Output& out, std::ostream& log) {
    cfg.family = family == "smooth-bump" ? BlowupFamily::smooth_bump : BlowupFamily::truncated_log_profile;
    const BlowupReport rep = boundary_blowup_probe(cfg);
    std::vector<double> eps, radius, lhs, fn, gn, ratio;
    for (const auto& r : rep.rows) {
      eps.push_back(r.epsilon);
      radius.push_back(r.inner_radius);
      lhs.push_back(r.lhs);
      fn.push_back(r.f_norm);
      gn.push_back(r.g_norm);
      ratio.push_back(r.ratio);
    }
    write_csv(out.file("blowup.csv"), {"epsilon", "inner_radius", "lhs", "f_norm", "g_norm", "ratio"},
              {eps, radius, lhs, fn, gn, ratio});
    const bool ok = cfg.family == BlowupFamily::smooth_bump ? rep.max_relative_spread <= max_spread
                                                            : rep.growth >= min_growth;
    write_json(out.file("blowup.json"), {{"family", family},
                                         {"growth", rep.growth},
                                         {"monotone", rep.monotone},
                                         {"max_relative_spread", rep.max_relative_spread},
                                         {"passed", ok}});
    log << "growth " << rep.growth << ", spread " << rep.max_relative_spread << '\n';
    return ok ? 0 : 1;
  }
};

struct Interp {
  double alpha = 0.5, p = 1.2, q = 1.2, structural = 1.0;
  int dim = 1;

  void add(CLI::App* s) {
    s->add_option("--alpha", alpha, "order alpha in (0, d)");
    s->add_option("--d", dim, "dimension")->check(CLI::Range(1, 3));
    s->add_option("--p", p, "exponent of f");
    s->add_option("--q", q, "exponent of g");
    s->add_option("--structural", structural, "structural multiplier of the interpolation theorem");
  }

  int run(Output& out, std::ostream& log) const {
    const auto constants = ProofConstants::make(alpha, dim).c_rest_all();
    InterpolatedBound b;
    try {
      b = interpolate_bound(1.0 / p, 1.0 / q, alpha, dim, constants, structural);
    } catch (const std::domain_error& e) {
      throw UsageError(e.what());
    }
    const json j = {{"p", p},
                    {"q", q},
                    {"r", 1.0 / b.weights.inv_r},
                    {"inv_r", b.weights.inv_r},
                    {"region", to_string(b.region)},
                    {"triangle", b.triangle},
                    {"vertices", b.vertex_ids},
                    {"theta", b.weights.theta},
                    {"interior", b.weights.interior},
                    {"side_condition", b.weights.side_condition},
                    {"roundtrip_error", b.weights.roundtrip_error},
                    {"vertex_constants", constants},
                    {"geometric_mean", b.geometric_mean},
                    {"structural_multiplier", b.structural_multiplier},
                    {"constant", b.constant}};
    write_json(out.file("interp.json"), j);
    log << j.dump() << '\n';
    return 0;
  }
};

struct SimConfig {
  long cells = 256;
  int dim = 1, theta_count = 16;
  FluidParams params{};
  std::string scheme = "ssp-rk3", formulation = "divergence", flux_average = "centered2", preset = "smooth";
  double cfl = 0.4, t_end = 0.1, output_interval = 0.01, amplitude = 0.0, c_d = 1.0;

  void add(CLI::App* s) {
    s->add_option("--N", cells, "cells per axis on the unit torus");
    s->add_option("--d", dim, "dimension")->check(CLI::Range(1, 2));
    s->add_option("--gamma", params.gamma, "pressure exponent");
    s->add_option("--alpha", params.alpha, "Riesz order");
    s->add_option("--kappa", params.kappa, "interaction strength");
    s->add_option("--scheme", scheme, "time integrator")->check(CLI::IsMember({"ssp-rk2", "ssp-rk3"}));
    s->add_option("--formulation", formulation, "interaction form")->check(CLI::IsMember({"force", "divergence"}));
    s->add_option("--flux-average", flux_average, "interface average of S")
        ->check(CLI::IsMember({"centered2", "centered4"}));
    s->add_option("--preset", preset, "initial data")->check(CLI::IsMember({"constant", "smooth", "perturbed"}));
    s->add_option("--amplitude", amplitude, "perturbation amplitude of the perturbed preset");
    s->add_option("--cfl", cfl, "CFL number");
    s->add_option("--t-end", t_end, "final time");
    s->add_option("--output-interval", output_interval, "snapshot spacing");
    s->add_option("--theta-count", theta_count, "Gauss points in theta");
    s->add_option("--c-d", c_d, "constant of the compensated-integrability bound (reported only)");
  }

  SolverOptions solver() const {
    SolverOptions o;
    o.scheme = time_scheme_from_string(scheme);
    o.formulation = formulation_from_string(formulation);
    o.flux_average = fd_scheme(flux_average);
    o.cfl = cfl;
    o.theta_rule = ThetaQuadrature::make(ThetaRule::gauss_legendre, theta_count);
    return o;
  }

  int run(Output& out, std::ostream& log) const {
    const SolverOptions o = solver();
    const Grid grid = make_grid(dim, cells, 0.5, true);
    const FluidState s0 = init_state(grid, preset_data(preset, amplitude), params, o.vacuum_floor);
    const Trajectory traj = riesz::run(s0, t_end, output_interval, o);
    write_trajectory(out.dir / "trajectory", traj);
    out.files.push_back("trajectory/");
    const EnergyLedger led = energy_report(traj, c_d);
    write_ledger_csv(out.file("ledger.csv"), led);
    const bool mass_ok = led.mass_drift <= 1e-12;
    const bool momentum_ok = o.formulation != Formulation::divergence || led.momentum_drift <= 1e-12;
    json j = to_json(led);
    j["steps"] = traj.steps;
    j["mass_passed"] = mass_ok;
    j["momentum_passed"] = momentum_ok;
    write_json(out.file("ledger.json"), j);
    log << "steps " << traj.steps << ", mass drift " << led.mass_drift << ", energy drift " << led.energy_drift
        << ", momentum drift " << led.momentum_drift << '\n';
    return mass_ok && momentum_ok ? 0 : 1;
  }
};

struct SimDiagnostics {
  std::string traj;
  int theta_count = 16;
  double c_d = 1.0, tolerance = 1e-10;

  void add(CLI::App* s) {
    s->add_option("--traj", traj, "trajectory directory written by sim-run")->required();
    s->add_option("--theta-count", theta_count, "Gauss points in theta");
    s->add_option("--c-d", c_d, "constant of the compensated-integrability bound (reported only)");
    s->add_option("--tolerance", tolerance, "relative tolerance of the determinant bounds");
  }

  int run(Output& out) const {
    if (!fs::exists(fs::path(traj) / "trajectory.json")) throw UsageError("no trajectory in '" + traj + "'");
    const Trajectory t = read_trajectory(traj);
    const ThetaQuadrature tq = ThetaQuadrature::make(ThetaRule::gauss_legendre, theta_count);
    const bool repulsive = t.snapshots.front().params.kappa >= 0.0;
    bool ok = true;
    std::vector<double> time, mp, mt, ma, eigs, smax, eiga;
    if (repulsive) {
      for (const auto& s : t.snapshots) {
        const DetBoundsReport r = det_bounds_check(s, tq, tolerance);
        ok = ok && r.passed;
        time.push_back(s.time);
        mp.push_back(r.margin_pressure);
        mt.push_back(r.margin_tensor);
        ma.push_back(r.margin_space_time);
        eigs.push_back(r.min_eigenvalue_S);
        smax.push_back(r.max_abs_S);
        eiga.push_back(r.min_eigenvalue_A);
      }
      write_csv(out.file("det_bounds.csv"),
                {"time", "margin_pressure", "margin_tensor", "margin_space_time", "min_eig_S", "max_abs_S", "min_eig_A"},
                {time, mp, mt, ma, eigs, smax, eiga});
    }
    const EnergyLedger led = energy_report(t, c_d);
    write_ledger_csv(out.file("ledger.csv"), led);
    json j = to_json(led);
    j["det_bounds_checked"] = repulsive;
    j["det_bounds_passed"] = ok;
    write_json(out.file("diagnostics.json"), j);
    return ok ? 0 : 1;
  }
};

struct RelRun {
  RelativeRunConfig cfg;
  std::string scheme = "ssp-rk3";
  long cstar_samples = 200;

  void add(CLI::App* s) {
    s->add_option("--N", cfg.cells, "cells of the perturbed run (background uses 2N)");
    s->add_option("--d", cfg.dim, "dimension")->check(CLI::Range(1, 2));
    s->add_option("--gamma", cfg.params.gamma, "pressure exponent");
    s->add_option("--alpha", cfg.params.alpha, "Riesz order");
    s->add_option("--kappa", cfg.params.kappa, "interaction strength (either sign)");
    s->add_option("--amplitude", cfg.amplitude, "perturbation amplitude");
    s->add_option("--t-end", cfg.t_end, "final time");
    s->add_option("--output-per-h", cfg.output_per_h, "snapshot spacing in grid spacings");
    s->add_option("--scheme", scheme, "time integrator")->check(CLI::IsMember({"ssp-rk2", "ssp-rk3"}));
    s->add_option("--cstar-samples", cstar_samples, "random pairs for the C* estimate");
  }

  int run(Output& out, std::uint64_t seed, std::ostream& log) {
    cfg.solver.scheme = time_scheme_from_string(scheme);
    CStarOptions co;
    co.dim = cfg.dim;
    co.cells = cfg.cells;
    co.alpha = cfg.params.alpha;
    co.gamma = cfg.params.gamma;
    co.samples = cstar_samples;
    co.seed = seed;
    const CStarReport cs = cstar_estimate(co);
    const RelativeRun rr = relative_run(cfg);
    write_psi_csv(out.file("psi.csv"), rr.identity);
    const bool in_window = std::abs(cfg.params.kappa) < cs.kappa_limit();
    bool positive = true;
    for (const auto& s : rr.identity.samples)
      positive = positive && s.psi >= 0.0 && lambda_positivity(s, cfg.params.kappa, cs.c_star);
    json j = to_json(rr.stability);
    j["max_identity_residual"] = rr.identity.max_residual;
    j["kappa"] = cfg.params.kappa;
    j["kappa_in_window"] = in_window;
    j["psi_positive"] = positive;
    write_json(out.file("stability.json"), j);
    write_json(out.file("cstar.json"), to_json(cs));
    log << "C* " << cs.c_star << ", C_fit " << rr.stability.c_fit << ", max residual " << rr.identity.max_residual
        << '\n';
    return !in_window || positive ? 0 : 1;
  }
};

struct RelFit {
  std::string psi_path;

  void add(CLI::App* s) { s->add_option("--psi", psi_path, "psi.csv written by rel-run")->required(); }

  int run(Output& out) const {
    std::ifstream in(psi_path);
    if (!in) throw UsageError("cannot read '" + psi_path + "'");
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
      std::stringstream ss(line);
      std::string h;
      while (std::getline(ss, h, ',')) header.push_back(h);
    }
    const auto ti = std::find(header.begin(), header.end(), "time") - header.begin();
    const auto pi = std::find(header.begin(), header.end(), "psi") - header.begin();
    if (ti == static_cast<long>(header.size()) || pi == static_cast<long>(header.size()))
      throw UsageError("psi series needs time and psi columns");
    std::vector<double> t, p;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const std::vector<double> v = parse_numbers(line);
      t.push_back(v.at(ti));
      p.push_back(v.at(pi));
    }
    const StabilityReport r = gronwall_fit(t, p);
    write_json(out.file("stability.json"), to_json(r));
    return r.identity_violation ? 1 : 0;
  }
};

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical experiments for bilinear fractional integrals and Euler-Riesz flows", "riesz"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config, out_dir = "out";
  std::uint64_t seed = 1;
  auto common = [&](CLI::App* s) {
    s->option_defaults()->always_capture_default();
    s->add_option("--config", config, "JSON file with option values (command-line flags win)");
    s->add_option("--seed", seed, "random seed");
    s->add_option("--out", out_dir, "output directory");
  };

  OpEval op_eval;
  IdentityCheck identity;
  Hls hls;
  AuxLemmas aux, annuli;
  Sums sums;
  Restricted restricted;
  UniformScan scan;
  Blowup blowup;
  Interp interp;
  SimConfig sim;
  SimDiagnostics diag;
  RelRun rel_run;
  RelFit rel_fit;

  std::map<std::string, std::function<int(Output&)>> handlers;
  auto sub = [&](const std::string& name, const std::string& help, auto& handler, auto body) {
    CLI::App* s = app.add_subcommand(name, help);
    common(s);
    handler.add(s);
    handlers[name] = body;
  };
  sub("op-eval", "evaluate an operator on a grid", op_eval, [&](Output& o) { return op_eval.run(o); });
  sub("identity-check", "convergence of the direct and divergence interaction forces", identity,
      [&](Output& o) { return identity.run(o, err); });
  sub("hls", "Hardy-Littlewood-Sobolev pairing (reported only)", hls, [&](Output& o) { return hls.run(o); });
  sub("aux-lemmas", "unit and dyadic truncation bounds on random sets", aux,
      [&](Output& o) { return aux.run(o, seed, false); });
  sub("annuli", "annulus estimates on random set triples", annuli, [&](Output& o) { return annuli.run(o, seed, true); });
  sub("sums", "dyadic geometric sums against their closed-form bounds", sums, [&](Output& o) { return sums.run(o, err); });
  sub("restricted", "restricted weak-type endpoint estimates", restricted,
      [&](Output& o) { return restricted.run(o, seed); });
  sub("uniform-scan", "theta-uniform strong bound at an interior exponent point", scan,
      [&](Output& o) { return scan.run(o, seed, err); });
  sub("blowup-probe", "ratio growth towards the boundary of the exponent square", blowup,
      [&](Output& o) { return blowup.run(o, err); });
  sub("interp", "interpolated constant at an exponent point", interp, [&](Output& o) { return interp.run(o, out); });
  sub("sim-run", "run the Euler-Riesz solver", sim, [&](Output& o) { return sim.run(o, err); });
  sub("sim-diagnostics", "determinant bounds and energy ledger of a stored trajectory", diag,
      [&](Output& o) { return diag.run(o); });
  sub("rel-run", "relative energy between a perturbed and a background run", rel_run,
      [&](Output& o) { return rel_run.run(o, seed, err); });
  sub("rel-fit", "Gronwall fit of a relative-energy series", rel_fit, [&](Output& o) { return rel_fit.run(o); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    apply_thread_env();
    if (!config.empty()) merge_config(chosen, config);
    Output output{out_dir, {}};
    fs::create_directories(output.dir);
    const json cfg = effective_config(chosen);
    const int rc = handlers.at(name)(output);
    write_manifest(output, name, cfg, seed, rc);
    return rc;
  } catch (const UsageError& e) {
    err << name << ": " << e.what() << '\n' << chosen->help();
    return 2;
  } catch (const CLI::Error& e) {
    err << name << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << name << ": " << e.what() << '\n';
    return 2;
  }
}

}  // namespace riesz::cli
