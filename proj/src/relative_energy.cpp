#include "riesz/relative_energy.hpp"

#include "riesz/summation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace riesz {

namespace {

// (1 + x)^g - 1 - g x without cancellation in the leading terms.
double convex_remainder(double x, double g) { return std::expm1(g * std::log1p(x)) - g * x; }

double h_rel(double r, double rb, double gamma) {
  return std::pow(rb, gamma) / (gamma - 1.0) * convex_remainder((r - rb) / rb, gamma);
}

GridFunction difference(const GridFunction& a, const GridFunction& b) {
  return GridFunction(a.grid(), a.values() - b.values());
}

double cell_sum(const Eigen::VectorXd& v, double w) {
  CompensatedSum<> s;
  for (long i = 0; i < v.size(); ++i) s.add(v[i]);
  return s.value() * w;
}

}  // namespace

GridFunction internal_energy_rel(const GridFunction& rho, const GridFunction& rho_bar, double gamma, double floor) {
  if (!rho.grid().same_layout(rho_bar.grid())) throw std::invalid_argument("densities live on different grids");
  if (rho_bar.values().minCoeff() < floor) throw std::invalid_argument("background density below the vacuum floor");
  if (rho.values().minCoeff() < 0.0) throw std::invalid_argument("density must be nonnegative");
  Eigen::VectorXd out(rho.values().size());
  for (long i = 0; i < out.size(); ++i) out[i] = h_rel(rho[i], rho_bar[i], gamma);
  return GridFunction(rho.grid(), std::move(out));
}

double potential_energy(const GridFunction& f, double alpha, double kappa) {
  if (kappa == 0.0) return 0.0;
  const int d = f.grid().dim();
  const GridFunction pot = riesz_potential(f, alpha);
  return 0.5 * kappa / (d - alpha) * cell_sum(f.values().cwiseProduct(pot.values()), f.grid().cell_volume());
}

double energy_functional(const GridFunction& rho, double alpha, double gamma, double kappa) {
  const Eigen::VectorXd h = rho.values().array().pow(gamma) / (gamma - 1.0);
  return cell_sum(h, rho.grid().cell_volume()) + potential_energy(rho, alpha, kappa);
}

GridFunction functional_derivative(const GridFunction& rho, double alpha, double gamma, double kappa) {
  const int d = rho.grid().dim();
  Eigen::VectorXd out = gamma / (gamma - 1.0) * rho.values().array().pow(gamma - 1.0);
  if (kappa != 0.0) out += kappa / (d - alpha) * riesz_potential(rho, alpha).values();
  return GridFunction(rho.grid(), std::move(out));
}

SymTensorField relative_tensor(const GridFunction& rho, const GridFunction& rho_bar, const FluidParams& params,
                               const ThetaQuadrature& tq) {
  const Grid& grid = rho.grid();
  const int d = grid.dim();
  const GridFunction hr = internal_energy_rel(rho, rho_bar, params.gamma);
  SymTensorField out = params.kappa != 0.0
                           ? tensor_S(difference(rho, rho_bar), OperatorParams{params.alpha, 0.0, d}, tq).scaled(params.kappa)
                           : SymTensorField(grid);
  for (int a = 0; a < d; ++a) out.entry(a, a) += (params.gamma - 1.0) * hr.values();
  return out;
}

RelativeEnergySample psi(const FluidState& state, const FluidState& bar) {
  if (!state.grid.same_layout(bar.grid)) throw std::invalid_argument("states live on different grids");
  const double w = state.grid.cell_volume();
  Eigen::VectorXd kin(state.grid.size());
  for (long i = 0; i < kin.size(); ++i) {
    const Point du = state.velocity(i) - bar.velocity(i);
    kin[i] = 0.5 * state.rho[i] * du.squaredNorm();
  }
  RelativeEnergySample s;
  s.time = state.time;
  s.kinetic_rel = cell_sum(kin, w);
  s.internal_rel = cell_sum(internal_energy_rel(state.rho, bar.rho, state.params.gamma).values(), w);
  s.interaction_rel = potential_energy(difference(state.rho, bar.rho), state.params.alpha, state.params.kappa);
  s.psi = s.kinetic_rel + s.internal_rel + s.interaction_rel;
  return s;
}

std::vector<std::vector<Eigen::VectorXd>> velocity_gradient(const FluidState& state) {
  const Grid& grid = state.grid;
  const int d = grid.dim();
  const long n = grid.cells_per_axis();
  std::vector<Eigen::VectorXd> u(d, Eigen::VectorXd(grid.size()));
  for (long i = 0; i < grid.size(); ++i) {
    const Point v = state.velocity(i);
    for (int a = 0; a < d; ++a) u[a][i] = v[a];
  }
  std::vector<std::vector<Eigen::VectorXd>> g(d, std::vector<Eigen::VectorXd>(d, Eigen::VectorXd(grid.size())));
  const double h = grid.spacing();
  for (long i = 0; i < grid.size(); ++i) {
    const MultiIndex idx = grid.unravel(i);
    for (int j = 0; j < d; ++j) {
      auto at = [&](int off) {
        MultiIndex k = idx;
        k[j] = ((k[j] + off) % n + n) % n;
        return grid.ravel(k);
      };
      const long m2 = at(-2), m1 = at(-1), p1 = at(1), p2 = at(2);
      for (int a = 0; a < d; ++a)
        g[a][j][i] = (-u[a][p2] + 8.0 * u[a][p1] - 8.0 * u[a][m1] + u[a][m2]) / (12.0 * h);
    }
  }
  return g;
}

double relative_rhs(const FluidState& state, const FluidState& bar, const ThetaQuadrature& tq) {
  const int d = state.dim();
  const auto grad = velocity_gradient(bar);
  const SymTensorField r = relative_tensor(state.rho, bar.rho, state.params, tq);
  CompensatedSum<> acc;
  for (long i = 0; i < state.grid.size(); ++i) {
    const Point w = state.velocity(i) - bar.velocity(i);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) acc.add(grad[a][b][i] * (state.rho[i] * w[a] * w[b] + r.entry(a, b)[i]));
  }
  return -acc.value() * state.grid.cell_volume();
}

IdentityResidual identity_check(const Trajectory& traj, const Trajectory& bar, const ThetaQuadrature& tq) {
  const size_t n = traj.snapshots.size();
  if (n != bar.snapshots.size()) throw std::invalid_argument("trajectories have different snapshot counts");
  if (n < 3) throw std::invalid_argument("identity check needs at least three snapshots");
  IdentityResidual out;
  std::vector<double> t(n);
  for (size_t k = 0; k < n; ++k) {
    const FluidState& s = traj.snapshots[k];
    const FluidState& b = bar.snapshots[k];
    if (std::abs(s.time - b.time) > 1e-12 * std::max(1.0, std::abs(s.time)))
      throw std::invalid_argument("trajectories are sampled at different times");
    RelativeEnergySample sample = psi(s, b);
    sample.rhs = relative_rhs(s, b, tq);
    out.samples.push_back(sample);
    t[k] = s.time;
  }
  auto p = [&](size_t k) { return out.samples[k].psi; };
  for (size_t k = 0; k < n; ++k) {
    double dp;
    if (k == 0) {
      const double h1 = t[1] - t[0], h2 = t[2] - t[1];
      dp = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * p(0) + (h1 + h2) / (h1 * h2) * p(1) - h1 / (h2 * (h1 + h2)) * p(2);
    } else if (k == n - 1) {
      const double h1 = t[n - 2] - t[n - 3], h2 = t[n - 1] - t[n - 2];
      dp = h2 / (h1 * (h1 + h2)) * p(n - 3) - (h1 + h2) / (h1 * h2) * p(n - 2) +
           (2.0 * h2 + h1) / (h2 * (h1 + h2)) * p(n - 1);
    } else {
      const double h1 = t[k] - t[k - 1], h2 = t[k + 1] - t[k];
      dp = -h2 / (h1 * (h1 + h2)) * p(k - 1) + (h2 - h1) / (h1 * h2) * p(k) + h1 / (h2 * (h1 + h2)) * p(k + 1);
    }
    out.dpsi_dt.push_back(dp);
    out.residual.push_back(dp - out.samples[k].rhs);
    out.max_residual = std::max(out.max_residual, std::abs(out.residual.back()));
  }
  return out;
}

FluidState restrict_state(const FluidState& fine) {
  const Grid& fg = fine.grid;
  const int d = fg.dim();
  if (fg.cells_per_axis() % 2 != 0) throw std::invalid_argument("restriction needs an even resolution");
  const Grid cg(d, fg.cells_per_axis() / 2, fg.origin(), 2.0 * fg.spacing(), fg.periodic_flags());
  const double share = 1.0 / static_cast<double>(1L << d);
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(cg.size());
  std::vector<Eigen::VectorXd> m(d, Eigen::VectorXd::Zero(cg.size()));
  for (long i = 0; i < fg.size(); ++i) {
    MultiIndex idx = fg.unravel(i);
    for (int a = 0; a < d; ++a) idx[a] /= 2;
    const long c = cg.ravel(idx);
    rho[c] += share * fine.rho[i];
    for (int a = 0; a < d; ++a) m[a][c] += share * fine.momentum.components[a][i];
  }
  return FluidState{cg, GridFunction(cg, std::move(rho), true), VectorField{cg, std::move(m)}, fine.params, fine.time};
}

Trajectory restrict_trajectory(const Trajectory& fine) {
  Trajectory out;
  out.steps = fine.steps;
  out.events = fine.events;
  for (const auto& s : fine.snapshots) out.snapshots.push_back(restrict_state(s));
  return out;
}

namespace {

class PairSampler {
 public:
  explicit PairSampler(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  long uniform_int(long lo, long hi) {
    return lo + static_cast<long>(std::floor(uniform() * static_cast<double>(hi - lo + 1)));
  }

  // Random Fourier sum with |coefficients| summing to total.
  Eigen::VectorXd fourier(const Grid& grid, int modes, double total, bool with_mean) {
    const int d = grid.dim();
    std::vector<std::array<long, kMaxDim>> k(modes);
    std::vector<double> amp(modes), phase(modes);
    double norm = 0.0;
    for (int m = 0; m < modes; ++m) {
      for (int a = 0; a < d; ++a) k[m][a] = uniform_int(-3, 3);
      if (std::all_of(k[m].begin(), k[m].begin() + d, [](long v) { return v == 0; })) k[m][0] = 1 + m % 3;
      amp[m] = 2.0 * uniform() - 1.0;
      phase[m] = 2.0 * std::numbers::pi * uniform();
      norm += std::abs(amp[m]);
    }
    double mean = 0.0;
    if (with_mean) {
      mean = 2.0 * uniform() - 1.0;
      norm += std::abs(mean);
    }
    const double scale = norm > 0.0 ? total / norm : 0.0;
    Eigen::VectorXd out(grid.size());
    for (long i = 0; i < grid.size(); ++i) {
      const Point x = grid.center(i);
      double v = mean;
      for (int m = 0; m < modes; ++m) {
        double arg = phase[m];
        for (int a = 0; a < d; ++a) arg += 2.0 * std::numbers::pi * static_cast<double>(k[m][a]) * x[a];
        v += amp[m] * std::cos(arg);
      }
      out[i] = scale * v;
    }
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

CStarSample measure_pair(const GridFunction& rho, const GridFunction& rho_bar, double alpha, double gamma) {
  const Grid& grid = rho.grid();
  const int d = grid.dim();
  const GridFunction f = difference(rho, rho_bar);
  const GridFunction pot = riesz_potential(f, alpha);
  CStarSample s;
  s.lhs = cell_sum(f.values().cwiseProduct(pot.values()).cwiseAbs(), grid.cell_volume()) / (d - alpha);
  s.rhs = cell_sum(internal_energy_rel(rho, rho_bar, gamma).values(), grid.cell_volume());
  s.ratio = s.rhs > 0.0 ? s.lhs / s.rhs : 0.0;
  return s;
}

}  // namespace

CStarReport cstar_estimate(const CStarOptions& opt) {
  if (!(opt.rho_bar_min > 0.0 && opt.rho_bar_max > opt.rho_bar_min))
    throw std::invalid_argument("background bounds must satisfy 0 < min < max");
  const Grid grid = make_grid(opt.dim, opt.cells, 0.5, true);
  CStarReport rep;
  rep.options = opt;
  rep.in_hypothesis = opt.gamma >= 2.0 - opt.alpha / opt.dim;
  PairSampler rng(opt.seed);
  const double center = 0.5 * (opt.rho_bar_min + opt.rho_bar_max);
  const double spread = 0.5 * (opt.rho_bar_max - opt.rho_bar_min);
  for (long k = 0; k < opt.samples; ++k) {
    const double bar_spread = spread * rng.uniform();
    Eigen::VectorXd bar = rng.fourier(grid, opt.modes, bar_spread, false);
    bar.array() += center;
    // Log-uniform perturbation size between 1e-3 and 0.9 of the background minimum.
    const double floor = center - bar_spread;
    const double size = 0.9 * floor * std::pow(10.0, -3.0 * rng.uniform());
    const Eigen::VectorXd f = rng.fourier(grid, opt.modes, size, true);
    const GridFunction rho_bar(grid, bar, true);
    const GridFunction rho(grid, bar + f, true);
    CStarSample s = measure_pair(rho, rho_bar, opt.alpha, opt.gamma);
    if (!(s.rhs > 1e-12)) {
      ++rep.skipped;
      continue;
    }
    rep.c_star = std::max(rep.c_star, s.ratio);
    rep.samples.push_back(s);
    ++rep.used;
  }
  return rep;
}

std::vector<CStarSample> cstar_concentration(const CStarOptions& opt, const std::vector<double>& widths,
                                             double amplitude) {
  const Grid grid = make_grid(opt.dim, opt.cells, 0.5, true);
  const GridFunction rho_bar = GridFunction::constant(grid, 1.0);
  std::vector<CStarSample> out;
  for (double w : widths) {
    const auto rho = GridFunction::sample(
        grid,
        [&](const Point& x) {
          return 1.0 + amplitude * std::pow(w, -opt.dim) * std::exp(-std::numbers::pi * x.squaredNorm() / (w * w));
        },
        true);
    out.push_back(measure_pair(rho, rho_bar, opt.alpha, opt.gamma));
  }
  return out;
}

bool lambda_positivity(const RelativeEnergySample& s, double kappa, double c_star) {
  const double lambda = 1.0 - std::abs(kappa) * c_star / 2.0;
  const double bound = lambda * s.internal_rel + s.kinetic_rel;
  return s.psi >= bound - 1e-12 * std::max(std::abs(s.psi), std::abs(bound));
}

StabilityReport gronwall_fit(const std::vector<double>& times, const std::vector<double>& psi) {
  if (times.size() != psi.size() || times.size() < 2) throw std::invalid_argument("Gronwall fit needs a series");
  StabilityReport r;
  r.psi0 = psi.front();
  if (r.psi0 <= 0.0) {
    r.zero_psi = true;
    r.identity_violation = std::any_of(psi.begin(), psi.end(), [](double v) { return v > 0.0; });
    return r;
  }
  r.c_fit = -std::numeric_limits<double>::infinity();
  for (size_t k = 1; k < psi.size(); ++k) {
    const double c = std::log(psi[k] / r.psi0) / (times[k] - times[0]);
    if (c > r.c_fit) {
      r.c_fit = c;
      r.argmax_time = times[k];
    }
  }
  for (size_t k = 0; k < psi.size(); ++k)
    r.max_bound_ratio = std::max(r.max_bound_ratio, psi[k] / (std::exp(r.c_fit * (times[k] - times[0])) * r.psi0));
  return r;
}

Trajectory background_trajectory(const RelativeRunConfig& cfg) {
  const Grid fine = make_grid(cfg.dim, 2 * cfg.cells, 0.5, true);
  const FluidState s0 = init_state(fine, preset_data("smooth"), cfg.params, cfg.solver.vacuum_floor);
  const double interval = cfg.output_per_h / static_cast<double>(cfg.cells);
  return restrict_trajectory(run(s0, cfg.t_end, interval, cfg.solver));
}

RelativeRun relative_run(const RelativeRunConfig& cfg) { return relative_run(cfg, background_trajectory(cfg)); }

RelativeRun relative_run(const RelativeRunConfig& cfg, const Trajectory& background) {
  const Grid grid = make_grid(cfg.dim, cfg.cells, 0.5, true);
  const FluidState s0 = init_state(grid, preset_data("perturbed", cfg.amplitude), cfg.params, cfg.solver.vacuum_floor);
  const double interval = cfg.output_per_h / static_cast<double>(cfg.cells);
  RelativeRun out;
  out.perturbed = run(s0, cfg.t_end, interval, cfg.solver);
  out.background = background;
  out.identity = identity_check(out.perturbed, out.background, cfg.solver.theta_rule);
  std::vector<double> t, p;
  for (const auto& s : out.identity.samples) {
    t.push_back(s.time);
    p.push_back(s.psi);
  }
  out.stability = gronwall_fit(t, p);
  return out;
}

void write_psi_csv(const std::filesystem::path& path, const IdentityResidual& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.precision(17);
  out << "time,kinetic_rel,internal_rel,interaction_rel,psi,dpsi_dt,rhs,residual\n";
  for (size_t k = 0; k < series.samples.size(); ++k) {
    const auto& s = series.samples[k];
    out << s.time << ',' << s.kinetic_rel << ',' << s.internal_rel << ',' << s.interaction_rel << ',' << s.psi << ','
        << series.dpsi_dt[k] << ',' << s.rhs << ',' << series.residual[k] << '\n';
  }
}

nlohmann::json to_json(const StabilityReport& r) {
  return {{"zero_psi", r.zero_psi},         {"identity_violation", r.identity_violation},
          {"c_fit", r.c_fit},               {"argmax_time", r.argmax_time},
          {"psi0", r.psi0},                 {"max_bound_ratio", r.max_bound_ratio}};
}

nlohmann::json to_json(const CStarReport& r) {
  return {{"c_star", r.c_star},
          {"kappa_limit", r.kappa_limit()},
          {"in_hypothesis", r.in_hypothesis},
          {"used", r.used},
          {"skipped", r.skipped},
          {"seed", r.options.seed},
          {"alpha", r.options.alpha},
          {"gamma", r.options.gamma},
          {"dim", r.options.dim},
          {"cells", r.options.cells},
          {"samples", r.options.samples},
          {"rho_bar_min", r.options.rho_bar_min},
          {"rho_bar_max", r.options.rho_bar_max}};
}

}  // namespace riesz
