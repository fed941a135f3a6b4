#pragma once

#include "riesz/euler_riesz.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace riesz {

// h(rho | rho_bar) = h(rho) - h(rho_bar) - h'(rho_bar)(rho - rho_bar). Throws
// std::invalid_argument when rho_bar drops below floor or rho is negative.
GridFunction internal_energy_rel(const GridFunction& rho, const GridFunction& rho_bar, double gamma,
                                 double floor = 1e-10);

// E(rho) = int h(rho) + kappa/2 rho (K_alpha * rho).
double energy_functional(const GridFunction& rho, double alpha, double gamma, double kappa);
// kappa/2 int f (K_alpha * f) for signed f.
double potential_energy(const GridFunction& f, double alpha, double kappa);
// h'(rho) + kappa K_alpha * rho.
GridFunction functional_derivative(const GridFunction& rho, double alpha, double gamma, double kappa);

// p(rho | rho_bar) I + kappa S(rho - rho_bar) with p(rho | rho_bar) = (gamma - 1) h(rho | rho_bar).
SymTensorField relative_tensor(const GridFunction& rho, const GridFunction& rho_bar, const FluidParams& params,
                               const ThetaQuadrature& tq);

struct RelativeEnergySample {
  double time = 0.0;
  double kinetic_rel = 0.0;
  double internal_rel = 0.0;
  double interaction_rel = 0.0;
  double psi = 0.0;
  // -int grad u_bar : (rho (u - u_bar) (x) (u - u_bar) + R(rho | rho_bar)).
  double rhs = 0.0;
};

// The three components of the relative energy; rhs is left at zero.
RelativeEnergySample psi(const FluidState& state, const FluidState& state_bar);

// Cell-wise gradient of the background velocity, fourth-order centered differences.
// Entry [i][j] holds d_j u_i.
std::vector<std::vector<Eigen::VectorXd>> velocity_gradient(const FluidState& state);

double relative_rhs(const FluidState& state, const FluidState& state_bar, const ThetaQuadrature& tq);

struct IdentityResidual {
  std::vector<RelativeEnergySample> samples;
  std::vector<double> dpsi_dt;
  std::vector<double> residual;
  double max_residual = 0.0;
};

// dPsi/dt by centered differences on the snapshot times (one-sided
// second-order at the ends) against the measured right-hand side.
IdentityResidual identity_check(const Trajectory& traj, const Trajectory& traj_bar, const ThetaQuadrature& tq);

// Cell averages over 2^d fine cells; the coarse grid has half the resolution.
FluidState restrict_state(const FluidState& fine);
Trajectory restrict_trajectory(const Trajectory& fine);

struct CStarOptions {
  int dim = 1;
  long cells = 128;
  double alpha = 0.5;
  double gamma = 2.0;
  long samples = 200;
  std::uint64_t seed = 1;
  int modes = 4;
  double rho_bar_min = 0.5;
  double rho_bar_max = 1.5;
};

struct CStarSample {
  double lhs = 0.0;  // ||(rho - rho_bar) K * (rho - rho_bar)||_1
  double rhs = 0.0;  // int h(rho | rho_bar)
  double ratio = 0.0;
};

struct CStarReport {
  CStarOptions options;
  bool in_hypothesis = true;  // gamma >= 2 - alpha/d
  double c_star = 0.0;
  long used = 0;
  long skipped = 0;
  std::vector<CStarSample> samples;

  double lambda(double kappa) const { return 1.0 - std::abs(kappa) * c_star / 2.0; }
  double kappa_limit() const { return c_star > 0.0 ? 2.0 / c_star : 0.0; }
};

// Random smooth periodic pairs: rho_bar = mean 1 plus Fourier modes inside
// [rho_bar_min, rho_bar_max], rho = rho_bar plus a signed Fourier perturbation
// keeping rho positive. Pairs with int h(rho | rho_bar) <= 1e-12 are skipped.
CStarReport cstar_estimate(const CStarOptions& options);

// Ratio lhs / rhs for rho_bar = 1 and rho - rho_bar a periodic bump of the
// given widths and amplitude.
std::vector<CStarSample> cstar_concentration(const CStarOptions& options, const std::vector<double>& widths,
                                             double amplitude);

// Psi >= lambda int h(rho | rho_bar) + kinetic part on one pair.
bool lambda_positivity(const RelativeEnergySample& sample, double kappa, double c_star);

struct StabilityReport {
  bool zero_psi = false;        // psi(0) = 0 branch
  bool identity_violation = false;  // psi(0) = 0 but psi(t) > 0
  double c_fit = 0.0;
  double argmax_time = 0.0;
  double psi0 = 0.0;
  double max_bound_ratio = 0.0;  // max psi(t) / (e^{c_fit t} psi(0))
};

StabilityReport gronwall_fit(const std::vector<double>& times, const std::vector<double>& psi);

struct RelativeRunConfig {
  int dim = 1;
  long cells = 128;
  FluidParams params{2.0, 0.5, 0.2};
  double amplitude = 0.05;
  double t_end = 0.1;
  // Snapshot spacing in units of the grid spacing of the perturbed run.
  double output_per_h = 0.5;
  SolverOptions solver{};
};

struct RelativeRun {
  Trajectory perturbed;
  Trajectory background;  // restricted to the perturbed grid
  IdentityResidual identity;
  StabilityReport stability;
};

// Perturbed preset at N cells against the smooth preset computed at 2N and restricted.
RelativeRun relative_run(const RelativeRunConfig& config);
// Same, reusing a restricted background trajectory with matching snapshot times.
RelativeRun relative_run(const RelativeRunConfig& config, const Trajectory& background);
Trajectory background_trajectory(const RelativeRunConfig& config);

void write_psi_csv(const std::filesystem::path& path, const IdentityResidual& series);
nlohmann::json to_json(const StabilityReport& r);
nlohmann::json to_json(const CStarReport& r);

}  // namespace riesz
