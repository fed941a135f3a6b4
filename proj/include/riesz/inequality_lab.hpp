#pragma once

#include "riesz/grid.hpp"
#include "riesz/interpolation.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace riesz {

// One measured inequality lhs <= tracked_constant * rhs.
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double tracked_constant = 0.0;
  double ratio = 0.0;
  std::map<std::string, double> params;
  std::string inputs;
  std::uint64_t seed = 0;
  bool asserted = true;
  bool passed = true;
};

// Fills ratio and passed. Asserted checks pass when
// lhs <= constant * rhs * (1 + 1e-12); unasserted ones when all values are finite.
InequalityReport finish_report(InequalityReport r);

nlohmann::json to_json(const InequalityReport& r);
void write_reports_csv(const std::filesystem::path& path, const std::vector<InequalityReport>& reports);
bool all_passed(const std::vector<InequalityReport>& reports);

struct ProofConstants {
  int dim = 1;
  double alpha = 0.5;
  double c_auxI = 0.0;      // 3^d 5^{2d}
  double c_auxIj1 = 1.0;
  double nu_d = 0.0;        // unit-ball measure
  double c_est = 0.0;       // max(3^d 5^{2d}, nu_d)
  double c_A1 = 0.0;
  double c_A2 = 0.0;
  double prefactor = 0.0;   // 2^{d - alpha}
  double weak_conversion = 1.0;

  static ProofConstants make(double alpha, int dim);
  double c_auxIj2(int j) const;
  // Restricted weak-type constant k = 1..4:
  // prefactor * c_est * (c_A1 for k <= 3, c_A2 for k = 4) * weak_conversion.
  double c_rest(int k) const;
  std::array<double, 4> c_rest_all() const { return {c_rest(1), c_rest(2), c_rest(3), c_rest(4)}; }
};

double unit_ball_measure(int dim);

InequalityReport hls_check(const GridFunction& f, const GridFunction& g, double alpha, double p, double q);
InequalityReport aux_unit_check(const GridFunction& f, const GridFunction& g, double theta);
// L1 bound (constant 1) and L^{1/2} bound (constant 2^{dj} 3^d 5^{2d}).
std::vector<InequalityReport> aux_dyadic_checks(const GridFunction& f, const GridFunction& g, double theta, int j);
// Same for every j in [jmin, jmax] from one sweep.
std::vector<InequalityReport> aux_dyadic_checks_range(const GridFunction& f, const GridFunction& g, double theta,
                                                      int jmin, int jmax);

// est1..est4 for I_j^theta(chi_A, chi_B) integrated over E.
std::vector<InequalityReport> annuli_estimate_suite(const CellSet& e, const CellSet& a, const CellSet& b,
                                                    double theta, int j);
std::vector<InequalityReport> annuli_estimate_suite_range(const CellSet& e, const CellSet& a, const CellSet& b,
                                                          double theta, int jmin, int jmax);

struct SumResult {
  double value = 0.0;
  double bound = 0.0;
  bool passed = false;
};
// (sum_j 2^{(alpha-d)j/2} min(2^{dj}, a)^{1/2})^2 against c_A1 a^{alpha/d}.
SumResult geometric_sum_A1(double a, double alpha, int dim);
// The sum inside the square above.
double geometric_sum_A1_inner(double a, double alpha, int dim);
// sum_j 2^{(alpha-d)j} min(2^{dj} a, b) against c_A2 a (b/a)^{alpha/d}.
SumResult geometric_sum_A2(double a, double b, double alpha, int dim);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// rest1..rest4: weak norms of I_alpha^theta(chi_A, chi_B) at
// r = d/(2d-alpha), 1, 1, d/alpha against c_k |A|^{1/p_k} |B|^{1/q_k}.
std::vector<InequalityReport> restricted_weak_type_suite(const CellSet& a, const CellSet& b, double alpha,
                                                         double theta);

enum class SetFamily { random_cell_unions, nested_cubes, separated_cubes, annuli };
std::string to_string(SetFamily f);
SetFamily set_family_from_string(const std::string& s);

// Seeded generator of cell sets inside a window of a box grid. The window
// spans cells [window_lo, window_hi] (inclusive) along every axis.
class SetPairSampler {
 public:
  SetPairSampler(const Grid& grid, SetFamily family, std::uint64_t seed, long window_lo, long window_hi);

  std::pair<CellSet, CellSet> next_pair();
  // A random-union E together with a pair from the family.
  std::array<CellSet, 3> next_triple();
  std::uint64_t seed() const { return seed_; }
  SetFamily family() const { return family_; }

 private:
  double uniform();
  long uniform_int(long lo, long hi);
  CellSet random_box_set();
  CellSet random_union();
  CellSet cube(const std::array<long, kMaxDim>& center, long half) const;

  Grid grid_;
  SetFamily family_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  long lo_, hi_;
};

struct ScanRow {
  long sample = 0;
  double theta = 0.0;
  double ratio = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct UniformScanReport {
  ExponentTriple triple{};
  RegionLabel region = RegionLabel::outside;
  InterpolatedBound bound;
  double safety_factor = 10.0;
  double sup_ratio = 0.0;
  std::vector<ScanRow> rows;
  bool passed = true;
};

// Ratios ||I_alpha^theta(f, g)||_r / (||f||_p ||g||_q) over theta for every
// input pair; each must stay below safety * interpolated constant. Throws
// std::domain_error with the region label unless 1 < p, q < d/alpha and the
// triple is scaling-consistent.
UniformScanReport uniform_bound_scan(const std::vector<std::pair<GridFunction, GridFunction>>& pairs,
                                     const ExponentTriple& triple, const std::vector<double>& thetas,
                                     double safety_factor = 10.0, double structural_multiplier = 1.0);

enum class BlowupFamily { truncated_log_profile, smooth_bump };

struct BlowupConfig {
  double alpha = 0.25;
  int dim = 1;
  double p = 2.0;
  double theta = 1.0;
  std::vector<double> epsilons{1e-1, 1e-2, 1e-3};
  double x0 = 0.0;
  long cells = 16000;
  double half_width = 2.0;
  double delta = 0.1;
  BlowupFamily family = BlowupFamily::truncated_log_profile;
  // Inner truncation radius of the profile family is epsilon^radius_power.
  double radius_power = 0.5;
};

struct BlowupRow {
  double epsilon = 0.0;
  double inner_radius = 0.0;
  double lhs = 0.0;
  double f_norm = 0.0;
  double g_norm = 0.0;
  double ratio = 0.0;
};

struct BlowupReport {
  BlowupConfig config;
  std::vector<BlowupRow> rows;
  double growth = 0.0;         // last ratio / first ratio
  bool monotone = false;
  double max_relative_spread = 0.0;  // (max - min) / min over the sweep
};

BlowupReport boundary_blowup_probe(const BlowupConfig& config);

}  // namespace riesz
