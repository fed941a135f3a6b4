#pragma once

#include "riesz/grid.hpp"
#include "riesz/operators.hpp"
#include "riesz/tensor_field.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace riesz {

struct FluidParams {
  double gamma = 2.0;
  double alpha = 0.5;
  double kappa = 1.0;
};

// Density and momentum on a periodic grid. Pressure is rho^gamma.
struct FluidState {
  Grid grid;
  GridFunction rho;
  VectorField momentum;
  FluidParams params;
  double time = 0.0;

  int dim() const { return grid.dim(); }
  Point velocity(long cell) const;
};

double pressure(double rho, double gamma);
// h(rho) = rho^gamma / (gamma - 1).
double internal_energy_density(double rho, double gamma);

enum class TimeScheme { ssp_rk2, ssp_rk3 };
enum class Formulation { force, divergence };

std::string to_string(TimeScheme s);
std::string to_string(Formulation f);
TimeScheme time_scheme_from_string(const std::string& s);
Formulation formulation_from_string(const std::string& s);

struct SolverOptions {
  TimeScheme scheme = TimeScheme::ssp_rk3;
  Formulation formulation = Formulation::divergence;
  double cfl = 0.4;
  // Interface average of S in the divergence formulation.
  FdScheme flux_average = FdScheme::centered2;
  ThetaQuadrature theta_rule = ThetaQuadrature::standard();
  double vacuum_floor = 1e-10;
};

struct VacuumEvent {
  double time;
  long cell;
  double value;
};

struct InitialData {
  std::function<double(const Point&)> rho;
  std::function<Point(const Point&)> velocity;
};

// Named profiles on the unit torus [-1/2, 1/2]^d:
//   constant:  rho = 1, u = 0
//   smooth:    rho = 1 + cos(2 pi x_0) ... cos(2 pi x_{d-1}) / 2, u_i = 0.1 sin(2 pi x_i)
//   perturbed: smooth plus amplitude * (sin(4 pi x_0 + 1) on rho, cos(2 pi x_i + 2) on u_i)
InitialData preset_data(const std::string& name, double amplitude = 0.0);

// Samples the profiles. Negative densities are rejected; densities below the
// floor are raised to it with zero momentum.
FluidState init_state(const Grid& grid, const InitialData& data, const FluidParams& params,
                      double vacuum_floor = 1e-10);

// CFL * h / max(|u_i| + sqrt(gamma rho^{gamma-1})).
double max_stable_dt(const FluidState& state, double cfl);

// One SSP Runge-Kutta step of the finite-volume scheme (WENO5 reconstruction,
// local Lax-Friedrichs fluxes). Throws std::invalid_argument when dt exceeds
// the CFL bound. Floor clamps are appended to events when given.
FluidState step(const FluidState& state, double dt, const SolverOptions& options,
                std::vector<VacuumEvent>* events = nullptr);

struct Trajectory {
  std::vector<FluidState> snapshots;
  std::vector<VacuumEvent> events;
  long steps = 0;
};

// Integrates to t_end, storing the initial state and every multiple of
// output_interval (the final time is always stored).
Trajectory run(const FluidState& initial, double t_end, double output_interval, const SolverOptions& options);

// Space-time tensor [rho, m^T; m, m m^T / rho + p I + kappa S] per cell.
struct SpaceTimeTensor {
  Grid grid;
  std::vector<SmallMatrix> cells;
};

// Requires kappa >= 0.
SpaceTimeTensor assemble_A_tensor(const FluidState& state, const ThetaQuadrature& tq);
SpaceTimeTensor assemble_A_tensor(const FluidState& state, const SymTensorField& s);

// Minimum relative margins over all cells of
//   det(p I + kappa S) >= p^d, det(p I + kappa S) >= det(kappa S), det A >= rho p^d,
// each (lhs - rhs) / max(|lhs|, |rhs|).
struct DetBoundsReport {
  double margin_pressure = 0.0;
  double margin_tensor = 0.0;
  double margin_space_time = 0.0;
  double min_eigenvalue_S = 0.0;
  double max_abs_S = 0.0;
  double min_eigenvalue_A = 0.0;
  double max_abs_A = 0.0;
  double tolerance = 1e-10;
  bool passed = false;
};

DetBoundsReport det_bounds_check(const FluidState& state, const ThetaQuadrature& tq, double tolerance = 1e-10);

struct EnergyRow {
  double time = 0.0;
  double mass = 0.0;
  std::vector<double> momentum;
  double kinetic = 0.0;
  double internal = 0.0;
  double interaction = 0.0;
  double total = 0.0;
  // Running int_0^t int rho^{gamma + 1/d} (trapezoid over output times).
  double spacetime = 0.0;
};

struct EnergyLedger {
  std::vector<EnergyRow> rows;
  double mass_drift = 0.0;      // max |mass(t) - mass(0)| / mass(0)
  double energy_drift = 0.0;    // max |total(t) - total(0)| / |total(0)|
  double momentum_drift = 0.0;  // max |P(t) - P(0)| / int |m(0)|
  double spacetime_norm = 0.0;  // (int int rho^{gamma + 1/d})^{1/(gamma + 1/d)}
  // int int rho^{1/d} p(rho) against 2 c_d (3/2 mass + energy(0))^{1 + 1/d}; reported only.
  double chain_lhs = 0.0;
  double chain_rhs = 0.0;
  double c_d = 1.0;
  long vacuum_events = 0;
};

struct EnergyTerms {
  double mass, kinetic, internal, interaction;
  std::vector<double> momentum;
};
EnergyTerms energy_terms(const FluidState& state);

EnergyLedger energy_report(const Trajectory& trajectory, double c_d = 1.0);
void write_ledger_csv(const std::filesystem::path& path, const EnergyLedger& ledger);
nlohmann::json to_json(const EnergyLedger& ledger);

// Snapshot directory: state_NNNN.grid files (channels rho, m0, ...) and
// trajectory.json with times and parameters.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& trajectory);
Trajectory read_trajectory(const std::filesystem::path& dir);

}  // namespace riesz
