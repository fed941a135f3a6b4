// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "oracles.hpp"

#include "riesz/euler_riesz.hpp"
#include "riesz/inequality_lab.hpp"
#include "riesz/interpolation.hpp"
#include "riesz/operators.hpp"
#include "riesz/relative_energy.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace riesz;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.passed) ++failures;
  std::printf("%s %2d %s: %s (%.1fs)\n", o.passed ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> theta_grid(int n) {
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) t[k] = static_cast<double>(k) / (n - 1);
  return t;
}

constexpr SetFamily kFamilies[4] = {SetFamily::random_cell_unions, SetFamily::nested_cubes,
                                    SetFamily::separated_cubes, SetFamily::annuli};

// d = 1 grid on [-32, 32] with h = 1/32; sets live in [-8, 8].
Grid lab_grid() { return make_grid(1, 2048, 32.0, false); }
SetPairSampler lab_sampler(const Grid& g, SetFamily family, std::uint64_t seed) {
  return SetPairSampler(g, family, seed, 768, 1279);
}

Outcome divergence_identity() {
  const ThetaQuadrature tq = ThetaQuadrature::standard();
  std::vector<double> gaps;
  for (long n : {128L, 256L, 512L}) {
    const Grid g = make_grid(1, n, 0.5, true);
    const auto rho = GridFunction::sample(
        g, [](const Point& x) { return 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * x[0]); }, true);
    gaps.push_back(force_form_gap(rho, OperatorParams{0.5, 0.0, 1}, tq, FdScheme::centered2));
  }
  const double r1 = gaps[0] / gaps[1], r2 = gaps[1] / gaps[2];
  std::ostringstream s;
  s << "gaps " << gaps[0] << ", " << gaps[1] << ", " << gaps[2] << "; ratios " << r1 << ", " << r2 << " (need >= 3.5)";
  return {r1 >= 3.5 && r2 >= 3.5, s.str()};
}

Outcome l1_identity() {
  const Grid g = make_grid(1, 512, 2.0, false);
  const double a0 = 0.0, a1 = 1.0, b0 = -0.5, b1 = 0.25;
  const GridFunction fa = CellSet::box(g, Point::Constant(1, a0), Point::Constant(1, a1)).indicator();
  const GridFunction fb = CellSet::box(g, Point::Constant(1, b0), Point::Constant(1, b1)).indicator();
  const double exact = oracle::interval_pair_integral(a0, a1, b0, b1, 0.5);
  double worst = 0.0;
  for (double th : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double v = integral(bilinear_op(fa, fb, OperatorParams{0.5, th, 1}));
    worst = std::max(worst, std::abs(v - exact) / exact);
  }
  return {worst <= 1e-3, "max relative error " + fmt("%.3e", worst) + " over 5 theta (need <= 1e-3)"};
}

Outcome auxiliary_lemmas() {
  const Grid g = lab_grid();
  long checks = 0, violations = 0;
  double worst = 0.0;
  for (int fam = 0; fam < 4; ++fam) {
    SetPairSampler sampler = lab_sampler(g, kFamilies[fam], 100 + fam);
    for (int k = 0; k < 25; ++k) {
      const auto [e, a, b] = sampler.next_triple();
      const GridFunction fa = a.indicator(), fb = b.indicator();
      for (double th : theta_grid(11)) {
        std::vector<InequalityReport> reps{aux_unit_check(fa, fb, th)};
        for (auto& r : aux_dyadic_checks_range(fa, fb, th, -4, 4)) reps.push_back(r);
        for (auto& r : annuli_estimate_suite_range(e, a, b, th, -4, 4)) reps.push_back(r);
        for (const auto& r : reps) {
          ++checks;
          if (!r.passed) ++violations;
          worst = std::max(worst, r.ratio / r.tracked_constant);
        }
      }
    }
  }
  std::ostringstream s;
  s << checks << " checks on 100 triples, " << violations << " violations, max ratio/constant " << worst;
  return {violations == 0, s.str()};
}

Outcome sum_lemmas() {
  bool bounds = true;
  double worst_slope = 0.0;
  const std::pair<double, int> cases[3] = {{0.5, 1}, {1.0, 2}, {1.5, 2}};
  for (auto [alpha, d] : cases) {
    std::vector<double> xa, ya, xb, yb;
    for (int k = -10; k <= 10; ++k) {
      const double a = std::ldexp(1.0, k);
      const SumResult r1 = geometric_sum_A1(a, alpha, d);
      bounds = bounds && r1.passed;
      xa.push_back(a);
      ya.push_back(r1.value);
      for (int l = -10; l <= 10; ++l) {
        const double b = a * std::ldexp(1.0, l);
        const SumResult r2 = geometric_sum_A2(a, b, alpha, d);
        bounds = bounds && r2.passed;
        if (k == 0) {
          xb.push_back(b);
          yb.push_back(r2.value);
        }
      }
    }
    const double target = alpha / d;
    worst_slope = std::max({worst_slope, std::abs(oracle::loglog_slope(xa, ya) - target),
                            std::abs(oracle::loglog_slope(xb, yb) - target)});
  }
  return {bounds && worst_slope <= 0.05,
          std::string("bounds ") + (bounds ? "hold" : "violated") + ", max |slope - alpha/d| " +
              fmt("%.3e", worst_slope) + " (need <= 0.05)"};
}

Outcome restricted_suite() {
  const Grid g = lab_grid();
  long violations = 0, checks = 0;
  double spread[4] = {0, 0, 0, 0};
  for (int fam = 0; fam < 4; ++fam) {
    SetPairSampler sampler = lab_sampler(g, kFamilies[fam], 200 + fam);
    for (int k = 0; k < 25; ++k) {
      const auto [a, b] = sampler.next_pair();
      double lo[4], hi[4];
      std::fill(lo, lo + 4, std::numeric_limits<double>::infinity());
      std::fill(hi, hi + 4, 0.0);
      for (double th : theta_grid(11)) {
        const auto reps = restricted_weak_type_suite(a, b, 0.5, th);
        for (int e = 0; e < 4; ++e) {
          ++checks;
          if (!reps[e].passed) ++violations;
          lo[e] = std::min(lo[e], reps[e].ratio);
          hi[e] = std::max(hi[e], reps[e].ratio);
        }
      }
      for (int e = 0; e < 4; ++e)
        if (lo[e] > 0.0) spread[e] = std::max(spread[e], hi[e] / lo[e]);
    }
  }
  std::ostringstream s;
  s << checks << " checks, " << violations << " violations; max/min over theta: rest1 " << spread[0] << ", rest2 "
    << spread[1] << ", rest3 " << spread[2] << ", rest4 " << spread[3];
  return {violations == 0, s.str()};
}

Outcome interpolation_geometry() {
  // Hand-labeled points for alpha/d = 1/2.
  struct Labeled {
    double x, y;
    RegionLabel label;
  };
  const Labeled points[] = {
      {5.0 / 6.0, 5.0 / 6.0, RegionLabel::interior_square},
      {0.75, 0.6, RegionLabel::interior_square},
      {0.5, 0.5, RegionLabel::boundary_square},
      {1.0, 1.0, RegionLabel::boundary_square},
      {0.5, 0.8, RegionLabel::boundary_square},
      {1.0, 0.7, RegionLabel::boundary_square},
      {0.3, 0.4, RegionLabel::interior_pentagon_only},
      {0.9, 0.1, RegionLabel::interior_pentagon_only},
      {0.2, 0.2, RegionLabel::outside},
      {1.1, 0.7, RegionLabel::outside},
      {0.0, 0.6, RegionLabel::outside},
  };
  int mislabeled = 0;
  for (const auto& p : points)
    if (classify_region(p.x, p.y, 0.5, 1) != p.label) ++mislabeled;

  double defect = 0.0;
  for (auto [alpha, d] : {std::pair{0.5, 1}, std::pair{0.25, 1}, std::pair{1.0, 2}, std::pair{1.5, 2}, std::pair{2.5, 3}})
    for (const auto& v : vertex_triples(alpha, d)) defect = std::max(defect, std::abs(v.scaling_defect(alpha, d)));

  double roundtrip = 0.0;
  std::mt19937_64 gen(7);
  auto uni = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  for (auto [alpha, d] : {std::pair{0.5, 1}, std::pair{1.0, 2}, std::pair{1.5, 2}}) {
    const double s = alpha / d;
    const auto verts = vertex_triples(alpha, d);
    const SquareTriangulation tri = triangulate_square(verts);
    for (int k = 0; k < 200; ++k) {
      const ReciprocalPoint p{s + (1.0 - s) * uni(), s + (1.0 - s) * uni(), 0.0};
      const auto& t = tri.triangles[tri.select(p)];
      const auto res = barycentric_solve(p, verts[t[0]], verts[t[1]], verts[t[2]]);
      roundtrip = std::max(roundtrip, res.roundtrip_error);
    }
  }
  std::ostringstream s;
  s << mislabeled << " mislabeled of " << std::size(points) << ", max vertex scaling defect " << defect
    << ", max roundtrip error " << roundtrip;
  return {mislabeled == 0 && defect <= 1e-15 && roundtrip <= 1e-12, s.str()};
}

Outcome uniform_scan() {
  const Grid g = lab_grid();
  std::vector<std::pair<GridFunction, GridFunction>> pairs;
  for (int fam = 0; fam < 4; ++fam) {
    SetPairSampler sampler = lab_sampler(g, kFamilies[fam], 300 + fam);
    for (int k = 0; k < 25; ++k) {
      const auto [a, b] = sampler.next_pair();
      pairs.emplace_back(a.indicator(), b.indicator());
    }
  }
  const ExponentTriple triple = ExponentTriple::from_pq(1.2, 1.2, 0.5, 1);
  const auto thetas = theta_grid(11);
  const UniformScanReport rep = uniform_bound_scan(pairs, triple, thetas, 10.0);

  std::vector<std::pair<GridFunction, GridFunction>> dilated;
  for (int k = 0; k < 100; k += 10) {
    dilated.emplace_back(rescale_dilate(pairs[k].first, 1), rescale_dilate(pairs[k].second, 1));
    dilated.emplace_back(rescale_dilate(pairs[k].first, -2), rescale_dilate(pairs[k].second, -2));
  }
  const UniformScanReport drep = uniform_bound_scan(dilated, triple, thetas, 10.0);
  double change = 0.0;
  for (size_t r = 0; r < drep.rows.size(); ++r) {
    const size_t base = (drep.rows[r].sample / 2) * 10 * thetas.size() + r % thetas.size();
    const double b = rep.rows[base].ratio;
    if (b > 0.0) change = std::max(change, std::abs(drep.rows[r].ratio - b) / b);
  }
  std::ostringstream s;
  s << rep.rows.size() << " ratios, r = " << triple.r << ", sup " << rep.sup_ratio << " vs 10 x "
    << rep.bound.constant << "; dilation change " << change;
  return {rep.passed && change <= 1e-6 && std::abs(triple.r - 6.0 / 7.0) < 1e-12, s.str()};
}

Outcome blowup_probe() {
  BlowupConfig cfg;
  const BlowupReport grow = boundary_blowup_probe(cfg);
  cfg.family = BlowupFamily::smooth_bump;
  const BlowupReport flat = boundary_blowup_probe(cfg);
  std::ostringstream s;
  s << "profile growth " << grow.growth << " (need >= 2), smooth spread " << flat.max_relative_spread
    << " (need <= 0.05)";
  return {grow.growth >= 2.0 && flat.max_relative_spread <= 0.05, s.str()};
}

// Shared N = 256 smooth run, SSP-RK3, divergence formulation, t in [0, 0.1].
const Trajectory& acceptance_run() {
  static const Trajectory traj = [] {
    const Grid g = make_grid(1, 256, 0.5, true);
    const FluidState s0 = init_state(g, preset_data("smooth"), FluidParams{2.0, 0.5, 1.0});
    return run(s0, 0.1, 0.01, SolverOptions{});
  }();
  return traj;
}

Outcome conservation() {
  const Trajectory& traj = acceptance_run();
  const EnergyLedger led = energy_report(traj);
  std::ostringstream s;
  s << "mass drift " << led.mass_drift << ", energy drift " << led.energy_drift << ", momentum drift "
    << led.momentum_drift << ", vacuum events " << led.vacuum_events;
  return {led.mass_drift <= 1e-12 && led.energy_drift <= 1e-4 && led.momentum_drift <= 1e-12 &&
              led.vacuum_events == 0,
          s.str()};
}

Outcome determinant_diagnostics() {
  const Trajectory& traj = acceptance_run();
  double margin = std::numeric_limits<double>::infinity(), eig = margin;
  bool ok = true;
  for (const auto& s : traj.snapshots) {
    const DetBoundsReport r = det_bounds_check(s, ThetaQuadrature::standard());
    ok = ok && r.passed;
    margin = std::min({margin, r.margin_pressure, r.margin_tensor, r.margin_space_time});
    eig = std::min(eig, r.min_eigenvalue_S / r.max_abs_S);
  }
  const EnergyLedger led = energy_report(traj);
  const bool finite = std::isfinite(led.spacetime_norm) && led.spacetime_norm > 0.0;
  std::ostringstream s;
  s << traj.snapshots.size() << " snapshots, min relative margin " << margin << ", min eig(S)/max|S| " << eig
    << "; space-time norm " << led.spacetime_norm << ", chain " << led.chain_lhs << " vs " << led.chain_rhs
    << " (c_d = 1, reported only)";
  return {ok && margin >= -1e-10 && eig >= -1e-10 && finite, s.str()};
}

Outcome relative_energy() {
  std::ostringstream s;
  bool ok = true;

  CStarOptions co;
  const CStarReport cs = cstar_estimate(co);
  s << "C* " << cs.c_star << ", kappa window " << cs.kappa_limit();
  const double kappa = 0.2;
  ok = ok && kappa < cs.kappa_limit();

  // Quadratic scaling of Psi in the perturbation amplitude.
  {
    const Grid g = make_grid(1, 256, 0.5, true);
    const FluidParams fp{2.0, 0.5, kappa};
    const FluidState bar = init_state(g, preset_data("smooth"), fp);
    std::vector<double> eps{1e-1, 1e-2, 1e-3}, vals;
    for (double e : eps) vals.push_back(psi(init_state(g, preset_data("perturbed", e), fp), bar).psi);
    const double slope = oracle::loglog_slope(eps, vals);
    s << "; psi slope " << slope;
    ok = ok && std::abs(slope - 2.0) <= 0.1;
  }

  bool positive = true;
  auto check_positive = [&](const RelativeRun& r, double k) {
    for (const auto& smp : r.identity.samples)
      positive = positive && smp.psi >= 0.0 && lambda_positivity(smp, k, cs.c_star);
  };

  RelativeRunConfig c128;
  c128.cells = 128;
  c128.params.kappa = kappa;
  const Trajectory bg128 = background_trajectory(c128);
  const RelativeRun r128 = relative_run(c128, bg128);
  RelativeRunConfig half = c128;
  half.amplitude /= 2.0;
  const RelativeRun r128h = relative_run(half, bg128);
  check_positive(r128, kappa);
  check_positive(r128h, kappa);

  RelativeRunConfig c256 = c128;
  c256.cells = 256;
  const RelativeRun r256 = relative_run(c256);
  check_positive(r256, kappa);

  RelativeRunConfig neg = c128;
  neg.params.kappa = -kappa;
  const RelativeRun rneg = relative_run(neg);
  check_positive(rneg, -kappa);

  const double shrink = r128.identity.max_residual / r256.identity.max_residual;
  const double cfit_change = std::abs(r128h.stability.c_fit - r128.stability.c_fit) / std::abs(r128.stability.c_fit);
  s << "; residual " << r128.identity.max_residual << " -> " << r256.identity.max_residual << " (x" << shrink
    << ", need >= 3.5); C_fit " << r128.stability.c_fit << " vs " << r128h.stability.c_fit << " at half amplitude ("
    << cfit_change * 100.0 << "%, need <= 25%); psi >= 0 on 4 runs: " << (positive ? "yes" : "no");
  ok = ok && shrink >= 3.5 && cfit_change <= 0.25 && positive;
  return {ok, s.str()};
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion(1, "divergence identity", divergence_identity);
  criterion(2, "L1 identity", l1_identity);
  criterion(3, "auxiliary lemmas", auxiliary_lemmas);
  criterion(4, "sum lemmas", sum_lemmas);
  criterion(5, "restricted weak-type suite", restricted_suite);
  criterion(6, "interpolation geometry", interpolation_geometry);
  criterion(7, "uniform-bound scan", uniform_scan);
  criterion(8, "boundary blow-up probe", blowup_probe);
  criterion(9, "simulator conservation", conservation);
  criterion(10, "determinant diagnostics", determinant_diagnostics);
  criterion(11, "relative energy", relative_energy);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d of 11 criteria failed; total %.1fs\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
