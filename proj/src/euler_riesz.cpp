#include "riesz/euler_riesz.hpp"

#include "riesz/grid_io.hpp"
#include "riesz/summation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace riesz {

Point FluidState::velocity(long cell) const {
  Point u(dim());
  for (int a = 0; a < dim(); ++a) u[a] = rho[cell] > 0.0 ? momentum.components[a][cell] / rho[cell] : 0.0;
  return u;
}

double pressure(double rho, double gamma) { return std::pow(rho, gamma); }

double internal_energy_density(double rho, double gamma) { return std::pow(rho, gamma) / (gamma - 1.0); }

std::string to_string(TimeScheme s) { return s == TimeScheme::ssp_rk2 ? "ssp-rk2" : "ssp-rk3"; }

std::string to_string(Formulation f) { return f == Formulation::force ? "force" : "divergence"; }

TimeScheme time_scheme_from_string(const std::string& s) {
  if (s == "ssp-rk2") return TimeScheme::ssp_rk2;
  if (s == "ssp-rk3") return TimeScheme::ssp_rk3;
  throw std::invalid_argument("unknown time scheme '" + s + "'");
}

Formulation formulation_from_string(const std::string& s) {
  if (s == "force") return Formulation::force;
  if (s == "divergence") return Formulation::divergence;
  throw std::invalid_argument("unknown formulation '" + s + "'");
}

InitialData preset_data(const std::string& name, double amplitude) {
  constexpr double tau = 2.0 * std::numbers::pi;
  if (name == "constant") {
    return {[](const Point&) { return 1.0; }, [](const Point& x) { return Point(Point::Zero(x.size())); }};
  }
  auto base_rho = [](const Point& x) {
    double c = 1.0;
    for (int a = 0; a < x.size(); ++a) c *= std::cos(tau * x[a]);
    return 1.0 + 0.5 * c;
  };
  auto base_u = [](const Point& x) {
    Point u(x.size());
    for (int a = 0; a < x.size(); ++a) u[a] = 0.1 * std::sin(tau * x[a]);
    return u;
  };
  if (name == "smooth") return {base_rho, base_u};
  if (name == "perturbed") {
    return {[=](const Point& x) { return base_rho(x) + amplitude * std::sin(2.0 * tau * x[0] + 1.0); },
            [=](const Point& x) {
              Point u = base_u(x);
              for (int a = 0; a < x.size(); ++a) u[a] += amplitude * std::cos(tau * x[a] + 2.0);
              return u;
            }};
  }
  throw std::invalid_argument("unknown initial-data preset '" + name + "'");
}

FluidState init_state(const Grid& grid, const InitialData& data, const FluidParams& params, double vacuum_floor) {
  if (!grid.fully_periodic()) throw std::invalid_argument("the fluid solver needs a periodic grid");
  if (grid.dim() > 2) throw std::invalid_argument("the fluid solver supports d = 1, 2");
  if (!(params.gamma > 1.0)) throw std::invalid_argument("gamma must exceed 1");
  OperatorParams{params.alpha, 0.0, grid.dim()}.validate();
  const int d = grid.dim();
  Eigen::VectorXd rho(grid.size());
  std::vector<Eigen::VectorXd> m(d, Eigen::VectorXd(grid.size()));
  for (long i = 0; i < grid.size(); ++i) {
    const Point x = grid.center(i);
    const double r = data.rho(x);
    if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument("initial density must be finite and nonnegative");
    const Point u = data.velocity(x);
    const bool vacuum = r < vacuum_floor;
    rho[i] = vacuum ? vacuum_floor : r;
    for (int a = 0; a < d; ++a) m[a][i] = vacuum ? 0.0 : r * u[a];
  }
  return FluidState{grid, GridFunction(grid, std::move(rho), true), VectorField{grid, std::move(m)}, params, 0.0};
}

double max_stable_dt(const FluidState& state, double cfl) {
  double speed = 0.0;
  const double g = state.params.gamma;
  for (long i = 0; i < state.grid.size(); ++i) {
    const double r = state.rho[i];
    const double c = std::sqrt(g * std::pow(r, g - 1.0));
    for (int a = 0; a < state.dim(); ++a) speed = std::max(speed, std::abs(state.momentum.components[a][i] / r) + c);
  }
  return speed > 0.0 ? cfl * state.grid.spacing() / speed : std::numeric_limits<double>::infinity();
}

namespace {

// Conserved variables: 0 = rho, 1..d = momentum.
using Vars = std::vector<Eigen::VectorXd>;

struct AxisWalk {
  long n, stride;
  long shift(long i, int off) const {
    const long k = (i / stride) % n;
    return i + (((k + off) % n + n) % n - k) * stride;
  }
};

AxisWalk axis_walk(const Grid& grid, int axis) {
  long stride = 1;
  for (int b = grid.dim() - 1; b > axis; --b) stride *= grid.cells_per_axis();
  return {grid.cells_per_axis(), stride};
}

// WENO5-JS value at the right face of v[2] from v[0..4].
double weno5(const double* v) {
  constexpr double eps = 1e-6;
  const double p0 = (2.0 * v[0] - 7.0 * v[1] + 11.0 * v[2]) / 6.0;
  const double p1 = (-v[1] + 5.0 * v[2] + 2.0 * v[3]) / 6.0;
  const double p2 = (2.0 * v[2] + 5.0 * v[3] - v[4]) / 6.0;
  const double b0 = 13.0 / 12.0 * std::pow(v[0] - 2.0 * v[1] + v[2], 2) + 0.25 * std::pow(v[0] - 4.0 * v[1] + 3.0 * v[2], 2);
  const double b1 = 13.0 / 12.0 * std::pow(v[1] - 2.0 * v[2] + v[3], 2) + 0.25 * std::pow(v[1] - v[3], 2);
  const double b2 = 13.0 / 12.0 * std::pow(v[2] - 2.0 * v[3] + v[4], 2) + 0.25 * std::pow(3.0 * v[2] - 4.0 * v[3] + v[4], 2);
  const double a0 = 0.1 / ((eps + b0) * (eps + b0));
  const double a1 = 0.6 / ((eps + b1) * (eps + b1));
  const double a2 = 0.3 / ((eps + b2) * (eps + b2));
  return (a0 * p0 + a1 * p1 + a2 * p2) / (a0 + a1 + a2);
}

class Rhs {
 public:
  Rhs(const FluidState& proto, const SolverOptions& options) : proto_(proto), options_(options) {}

  Vars operator()(const Vars& u) const {
    const Grid& grid = proto_.grid;
    const int d = grid.dim();
    const long n = grid.size();
    const double h = grid.spacing();
    const FluidParams& fp = proto_.params;
    Vars du(d + 1, Eigen::VectorXd::Zero(n));

    const bool interacting = fp.kappa != 0.0;
    const GridFunction rho(grid, u[0]);
    const OperatorParams op{fp.alpha, 0.0, d};
    std::vector<Eigen::VectorXd> s_entries;
    if (interacting && options_.formulation == Formulation::divergence)
      s_entries = tensor_S(rho, op, options_.theta_rule).entries();

    Vars flux(d + 1, Eigen::VectorXd(n));
    for (int axis = 0; axis < d; ++axis) {
      const AxisWalk walk = axis_walk(grid, axis);
#pragma omp parallel for schedule(static)
      for (long i = 0; i < n; ++i) {
        long idx[6];
        for (int k = 0; k < 6; ++k) idx[k] = walk.shift(i, k - 2);
        double left[kMaxDim + 1] = {}, right[kMaxDim + 1] = {};
        for (int v = 0; v <= d; ++v) {
          double q[6];
          for (int k = 0; k < 6; ++k) q[k] = u[v][idx[k]];
          const double rev[5] = {q[5], q[4], q[3], q[2], q[1]};
          left[v] = weno5(q);
          right[v] = weno5(rev);
        }
        if (!(left[0] > 0.0 && right[0] > 0.0)) {
          for (int v = 0; v <= d; ++v) {
            left[v] = u[v][idx[2]];
            right[v] = u[v][idx[3]];
          }
        }
        double fl[kMaxDim + 1], fr[kMaxDim + 1];
        const double sl = physical_flux(left, axis, fl);
        const double sr = physical_flux(right, axis, fr);
        const double speed = std::max(sl, sr);
        for (int v = 0; v <= d; ++v) flux[v][i] = 0.5 * (fl[v] + fr[v]) - 0.5 * speed * (right[v] - left[v]);
        if (!s_entries.empty()) {
          for (int b = 0; b < d; ++b) {
            const Eigen::VectorXd& s = s_entries[sym_channel(d, axis, b)];
            double face;
            if (options_.flux_average == FdScheme::centered2) {
              face = 0.5 * (s[idx[2]] + s[idx[3]]);
            } else {
              face = (-s[idx[1]] + 7.0 * s[idx[2]] + 7.0 * s[idx[3]] - s[idx[4]]) / 12.0;
            }
            flux[1 + b][i] += fp.kappa * face;
          }
        }
      }
      for (long i = 0; i < n; ++i) {
        const long prev = walk.shift(i, -1);
        for (int v = 0; v <= d; ++v) du[v][i] -= (flux[v][i] - flux[v][prev]) / h;
      }
    }

    if (interacting && options_.formulation == Formulation::force) {
      const VectorField force = interaction_force_direct(rho, op);
      for (int b = 0; b < d; ++b) du[1 + b] -= fp.kappa * force.components[b];
    }
    return du;
  }

 private:
  // Flux along axis into f; returns |u_axis| + c.
  double physical_flux(const double* w, int axis, double* f) const {
    const int d = proto_.dim();
    const double r = w[0];
    const double ua = w[1 + axis] / r;
    const double p = pressure(r, proto_.params.gamma);
    f[0] = w[1 + axis];
    for (int b = 0; b < d; ++b) f[1 + b] = w[1 + b] * ua + (b == axis ? p : 0.0);
    return std::abs(ua) + std::sqrt(proto_.params.gamma * p / r);
  }

  const FluidState& proto_;
  const SolverOptions& options_;
};

Vars pack(const FluidState& s) {
  Vars u{s.rho.values()};
  for (const auto& c : s.momentum.components) u.push_back(c);
  return u;
}

FluidState unpack(const FluidState& proto, Vars u, double time) {
  std::vector<Eigen::VectorXd> m(u.begin() + 1, u.end());
  return FluidState{proto.grid, GridFunction(proto.grid, std::move(u[0]), true),
                    VectorField{proto.grid, std::move(m)}, proto.params, time};
}

void apply_floor(Vars& u, double floor, double time, std::vector<VacuumEvent>* events) {
  for (long i = 0; i < u[0].size(); ++i) {
    if (u[0][i] >= floor) continue;
    if (events) events->push_back({time, i, u[0][i]});
    u[0][i] = floor;
    for (size_t v = 1; v < u.size(); ++v) u[v][i] = 0.0;
  }
}

// a * x + b * (y + dt * z)
Vars combine(double a, const Vars& x, double b, const Vars& y, double dt, const Vars& z) {
  Vars out(x.size());
  for (size_t v = 0; v < x.size(); ++v) out[v] = a * x[v] + b * (y[v] + dt * z[v]);
  return out;
}

}  // namespace

FluidState step(const FluidState& state, double dt, const SolverOptions& options, std::vector<VacuumEvent>* events) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const double limit = max_stable_dt(state, options.cfl);
  if (dt > limit * (1.0 + 1e-12)) throw std::invalid_argument("time step violates the CFL bound");
  const Rhs rhs(state, options);
  const Vars u0 = pack(state);
  const double t1 = state.time + dt;
  Vars u1 = combine(0.0, u0, 1.0, u0, dt, rhs(u0));
  apply_floor(u1, options.vacuum_floor, t1, events);
  if (options.scheme == TimeScheme::ssp_rk2) {
    Vars u2 = combine(0.5, u0, 0.5, u1, dt, rhs(u1));
    apply_floor(u2, options.vacuum_floor, t1, events);
    return unpack(state, std::move(u2), t1);
  }
  Vars u2 = combine(0.75, u0, 0.25, u1, dt, rhs(u1));
  apply_floor(u2, options.vacuum_floor, t1, events);
  Vars u3 = combine(1.0 / 3.0, u0, 2.0 / 3.0, u2, dt, rhs(u2));
  apply_floor(u3, options.vacuum_floor, t1, events);
  return unpack(state, std::move(u3), t1);
}

Trajectory run(const FluidState& initial, double t_end, double output_interval, const SolverOptions& options) {
  if (!(t_end >= initial.time)) throw std::invalid_argument("end time precedes the initial time");
  if (!(output_interval > 0.0)) throw std::invalid_argument("output interval must be positive");
  Trajectory traj;
  traj.snapshots.push_back(initial);
  FluidState state = initial;
  const double t0 = initial.time;
  long k = 1;
  while (state.time < t_end) {
    const double target = std::min(t0 + static_cast<double>(k) * output_interval, t_end);
    const double remaining = target - state.time;
    const double dt_max = max_stable_dt(state, options.cfl);
    const bool last = remaining <= dt_max * (1.0 + 1e-12);
    state = step(state, last ? remaining : dt_max, options, &traj.events);
    ++traj.steps;
    if (last) {
      state.time = target;
      traj.snapshots.push_back(state);
      ++k;
    }
  }
  return traj;
}

SpaceTimeTensor assemble_A_tensor(const FluidState& state, const ThetaQuadrature& tq) {
  if (state.params.kappa < 0.0) throw std::invalid_argument("the space-time tensor is assembled for kappa >= 0");
  return assemble_A_tensor(state, tensor_S(state.rho, OperatorParams{state.params.alpha, 0.0, state.dim()}, tq));
}

SpaceTimeTensor assemble_A_tensor(const FluidState& state, const SymTensorField& s) {
  const int d = state.dim();
  SpaceTimeTensor out{state.grid, {}};
  out.cells.reserve(state.grid.size());
  for (long i = 0; i < state.grid.size(); ++i) {
    SmallMatrix a = SmallMatrix::Zero(d + 1, d + 1);
    const double r = state.rho[i];
    const Point u = state.velocity(i);
    const double p = pressure(r, state.params.gamma);
    const SmallMatrix si = s.at(i);
    a(0, 0) = r;
    for (int x = 0; x < d; ++x) {
      a(0, 1 + x) = a(1 + x, 0) = r * u[x];
      for (int y = 0; y < d; ++y) a(1 + x, 1 + y) = r * u[x] * u[y] + (x == y ? p : 0.0) + state.params.kappa * si(x, y);
    }
    out.cells.push_back(a);
  }
  return out;
}

namespace {

double relative_margin(double lhs, double rhs) {
  const double scale = std::max({std::abs(lhs), std::abs(rhs), std::numeric_limits<double>::min()});
  return (lhs - rhs) / scale;
}

}  // namespace

DetBoundsReport det_bounds_check(const FluidState& state, const ThetaQuadrature& tq, double tolerance) {
  if (state.params.kappa < 0.0) throw std::invalid_argument("determinant bounds need kappa >= 0");
  const int d = state.dim();
  const SymTensorField s = tensor_S(state.rho, OperatorParams{state.params.alpha, 0.0, d}, tq);
  const SpaceTimeTensor a = assemble_A_tensor(state, s);
  DetBoundsReport rep;
  rep.tolerance = tolerance;
  rep.margin_pressure = rep.margin_tensor = rep.margin_space_time = std::numeric_limits<double>::infinity();
  rep.min_eigenvalue_S = s.min_eigenvalues().minCoeff();
  rep.max_abs_S = s.max_abs();
  rep.min_eigenvalue_A = std::numeric_limits<double>::infinity();
  for (long i = 0; i < state.grid.size(); ++i) {
    const double r = state.rho[i];
    const double p = pressure(r, state.params.gamma);
    const SmallMatrix ks = state.params.kappa * s.at(i);
    const SmallMatrix pis = ks + p * SmallMatrix::Identity(d, d);
    const double det_pis = pis.determinant();
    const double pd = std::pow(p, d);
    rep.margin_pressure = std::min(rep.margin_pressure, relative_margin(det_pis, pd));
    rep.margin_tensor = std::min(rep.margin_tensor, relative_margin(det_pis, ks.determinant()));
    rep.margin_space_time = std::min(rep.margin_space_time, relative_margin(a.cells[i].determinant(), r * pd));
    Eigen::SelfAdjointEigenSolver<SmallMatrix> eig(a.cells[i], Eigen::EigenvaluesOnly);
    rep.min_eigenvalue_A = std::min(rep.min_eigenvalue_A, eig.eigenvalues().minCoeff());
    rep.max_abs_A = std::max(rep.max_abs_A, a.cells[i].cwiseAbs().maxCoeff());
  }
  rep.passed = rep.margin_pressure >= -tolerance && rep.margin_tensor >= -tolerance &&
               rep.margin_space_time >= -tolerance && rep.min_eigenvalue_S >= -tolerance * rep.max_abs_S &&
               rep.min_eigenvalue_A >= -tolerance * rep.max_abs_A;
  return rep;
}

EnergyTerms energy_terms(const FluidState& state) {
  const Grid& grid = state.grid;
  const int d = state.dim();
  const double g = state.params.gamma;
  CompensatedSum<> mass, kin, inner;
  std::vector<CompensatedSum<>> mom(d);
  for (long i = 0; i < grid.size(); ++i) {
    const double r = state.rho[i];
    mass.add(r);
    double m2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double m = state.momentum.components[a][i];
      m2 += m * m;
      mom[a].add(m);
    }
    kin.add(0.5 * m2 / r);
    inner.add(internal_energy_density(r, g));
  }
  const double w = grid.cell_volume();
  EnergyTerms t{mass.value() * w, kin.value() * w, inner.value() * w, 0.0, {}};
  for (auto& m : mom) t.momentum.push_back(m.value() * w);
  if (state.params.kappa != 0.0) {
    const GridFunction pot = riesz_potential(state.rho, state.params.alpha);
    CompensatedSum<> e;
    for (long i = 0; i < grid.size(); ++i) e.add(state.rho[i] * pot[i]);
    t.interaction = 0.5 * state.params.kappa / (d - state.params.alpha) * e.value() * w;
  }
  return t;
}

namespace {

double spacetime_density(const FluidState& s) {
  const double e = s.params.gamma + 1.0 / s.dim();
  CompensatedSum<> acc;
  for (long i = 0; i < s.grid.size(); ++i) acc.add(std::pow(s.rho[i], e));
  return acc.value() * s.grid.cell_volume();
}

}  // namespace

EnergyLedger energy_report(const Trajectory& trajectory, double c_d) {
  if (trajectory.snapshots.empty()) throw std::invalid_argument("empty trajectory");
  EnergyLedger led;
  led.c_d = c_d;
  led.vacuum_events = static_cast<long>(trajectory.events.size());
  double running = 0.0, prev_density = 0.0, prev_time = 0.0;
  double momentum_scale = 0.0;
  const FluidState& first = trajectory.snapshots.front();
  for (const auto& c : first.momentum.components) momentum_scale += c.cwiseAbs().sum() * first.grid.cell_volume();
  for (size_t k = 0; k < trajectory.snapshots.size(); ++k) {
    const FluidState& s = trajectory.snapshots[k];
    const EnergyTerms t = energy_terms(s);
    const double dens = spacetime_density(s);
    if (k > 0) running += 0.5 * (s.time - prev_time) * (dens + prev_density);
    prev_density = dens;
    prev_time = s.time;
    EnergyRow row{s.time, t.mass, t.momentum, t.kinetic, t.internal, t.interaction,
                  t.kinetic + t.internal + t.interaction, running};
    if (!led.rows.empty()) {
      const EnergyRow& r0 = led.rows.front();
      led.mass_drift = std::max(led.mass_drift, std::abs(row.mass - r0.mass) / r0.mass);
      led.energy_drift = std::max(led.energy_drift, std::abs(row.total - r0.total) / std::abs(r0.total));
      double dp = 0.0;
      for (size_t a = 0; a < row.momentum.size(); ++a) dp = std::max(dp, std::abs(row.momentum[a] - r0.momentum[a]));
      led.momentum_drift = std::max(led.momentum_drift, momentum_scale > 0.0 ? dp / momentum_scale : dp);
    }
    led.rows.push_back(row);
  }
  const double e = first.params.gamma + 1.0 / first.dim();
  led.spacetime_norm = std::pow(running, 1.0 / e);
  led.chain_lhs = running;
  const EnergyRow& r0 = led.rows.front();
  led.chain_rhs = 2.0 * c_d * std::pow(1.5 * r0.mass + r0.total, 1.0 + 1.0 / first.dim());
  return led;
}

void write_ledger_csv(const std::filesystem::path& path, const EnergyLedger& ledger) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.precision(17);
  out << "time,mass";
  const size_t d = ledger.rows.empty() ? 0 : ledger.rows.front().momentum.size();
  for (size_t a = 0; a < d; ++a) out << ",momentum" << a;
  out << ",kinetic,internal,interaction,total,spacetime\n";
  for (const auto& r : ledger.rows) {
    out << r.time << ',' << r.mass;
    for (double m : r.momentum) out << ',' << m;
    out << ',' << r.kinetic << ',' << r.internal << ',' << r.interaction << ',' << r.total << ',' << r.spacetime
        << '\n';
  }
}

nlohmann::json to_json(const EnergyLedger& l) {
  return {{"mass_drift", l.mass_drift},         {"energy_drift", l.energy_drift},
          {"momentum_drift", l.momentum_drift}, {"spacetime_norm", l.spacetime_norm},
          {"chain_lhs", l.chain_lhs},           {"chain_rhs", l.chain_rhs},
          {"c_d", l.c_d},                       {"vacuum_events", l.vacuum_events},
          {"samples", l.rows.size()}};
}

void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj) {
  if (traj.snapshots.empty()) throw std::invalid_argument("empty trajectory");
  std::filesystem::create_directories(dir);
  nlohmann::json index;
  const FluidParams& p = traj.snapshots.front().params;
  index["gamma"] = p.gamma;
  index["alpha"] = p.alpha;
  index["kappa"] = p.kappa;
  index["steps"] = traj.steps;
  index["vacuum_events"] = nlohmann::json::array();
  for (const auto& e : traj.events) index["vacuum_events"].push_back({{"time", e.time}, {"cell", e.cell}, {"value", e.value}});
  index["snapshots"] = nlohmann::json::array();
  for (size_t k = 0; k < traj.snapshots.size(); ++k) {
    const FluidState& s = traj.snapshots[k];
    char name[32];
    std::snprintf(name, sizeof name, "state_%04zu.grid", k);
    std::vector<GridChannel> channels{{"rho", s.rho.values()}};
    for (int a = 0; a < s.dim(); ++a) channels.push_back({"m" + std::to_string(a), s.momentum.components[a]});
    write_grid_file(dir / name, s.grid, channels);
    index["snapshots"].push_back({{"file", name}, {"time", s.time}});
  }
  std::ofstream(dir / "trajectory.json") << index.dump(2) << '\n';
}

Trajectory read_trajectory(const std::filesystem::path& dir) {
  std::ifstream in(dir / "trajectory.json");
  if (!in) throw std::runtime_error("no trajectory.json in " + dir.string());
  const nlohmann::json index = nlohmann::json::parse(in);
  const FluidParams params{index.at("gamma").get<double>(), index.at("alpha").get<double>(),
                           index.at("kappa").get<double>()};
  Trajectory traj;
  traj.steps = index.value("steps", 0L);
  for (const auto& e : index.at("vacuum_events"))
    traj.events.push_back({e.at("time").get<double>(), e.at("cell").get<long>(), e.at("value").get<double>()});
  for (const auto& snap : index.at("snapshots")) {
    const GridFile f = read_grid_file(dir / snap.at("file").get<std::string>());
    std::vector<Eigen::VectorXd> m;
    for (int a = 0; a < f.grid.dim(); ++a) m.push_back(f.channel("m" + std::to_string(a)));
    traj.snapshots.push_back(FluidState{f.grid, GridFunction(f.grid, f.channel("rho"), true),
                                        VectorField{f.grid, std::move(m)}, params, snap.at("time").get<double>()});
  }
  return traj;
}

}  // namespace riesz
