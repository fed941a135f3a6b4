#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "riesz/inequality_lab.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace riesz;

TEST_CASE("proof constants") {
  const ProofConstants c1 = ProofConstants::make(0.5, 1);
  CHECK(c1.c_auxI == 75.0);
  CHECK(c1.nu_d == doctest::Approx(2.0));
  CHECK(c1.c_est == 75.0);
  CHECK(c1.c_A1 == doctest::Approx(oracle::c_A1(0.5, 1)));
  CHECK(c1.c_A2 == doctest::Approx(oracle::c_A2(0.5, 1)));
  CHECK(c1.c_auxIj2(2) == doctest::Approx(300.0));
  CHECK(c1.c_rest(1) == doctest::Approx(std::sqrt(2.0) * 75.0 * oracle::c_A1(0.5, 1)));
  CHECK(c1.c_rest(4) == doctest::Approx(std::sqrt(2.0) * 75.0 * oracle::c_A2(0.5, 1)));
  const ProofConstants c2 = ProofConstants::make(1.0, 2);
  CHECK(c2.c_auxI == 9.0 * 625.0);
  CHECK(c2.nu_d == doctest::Approx(std::numbers::pi));
  CHECK(unit_ball_measure(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
}

TEST_CASE("geometric sums against brute force") {
  for (auto [alpha, d] : {std::pair{0.5, 1}, std::pair{1.0, 2}, std::pair{1.5, 2}}) {
    for (double a : {1e-3, 0.3, 1.0, 7.0, 1e4}) {
      const SumResult r1 = geometric_sum_A1(a, alpha, d);
      CHECK(r1.value == doctest::Approx(oracle::sum_A1(a, alpha, d)).epsilon(1e-12));
      CHECK(r1.bound == doctest::Approx(oracle::c_A1(alpha, d) * std::pow(a, alpha / d)));
      CHECK(r1.passed);
      for (double b : {a * 0.01, a, a * 50.0}) {
        const SumResult r2 = geometric_sum_A2(a, b, alpha, d);
        CHECK(r2.value == doctest::Approx(oracle::sum_A2(a, b, alpha, d)).epsilon(1e-12));
        CHECK(r2.passed);
      }
    }
  }
}

TEST_CASE("least-squares slope") {
  const std::vector<double> x{1, 2, 4, 8}, y{3, 3 * std::sqrt(2.0), 6, 6 * std::sqrt(2.0)};
  CHECK(loglog_slope(x, y) == doctest::Approx(0.5));
}

TEST_CASE("report logic") {
  InequalityReport r;
  r.lhs = 2.0;
  r.rhs = 1.0;
  r.tracked_constant = 2.0;
  CHECK(finish_report(r).passed);
  CHECK(finish_report(r).ratio == doctest::Approx(2.0));
  r.lhs = 2.0 * (1 + 1e-9);
  CHECK_FALSE(finish_report(r).passed);
  r.asserted = false;
  CHECK(finish_report(r).passed);
  r.lhs = NAN;
  CHECK_FALSE(finish_report(r).passed);
  const auto j = to_json(finish_report(InequalityReport{"x", 1.0, 1.0, 1.0}));
  CHECK(j.at("name") == "x");
}

TEST_CASE("reports CSV") {
  const auto path = std::filesystem::temp_directory_path() / "riesz_reports.csv";
  InequalityReport a{"a", 1.0, 2.0, 1.0};
  a.params["theta"] = 0.5;
  InequalityReport b{"b", 1.0, 2.0, 1.0};
  b.params["j"] = 3;
  write_reports_csv(path, {finish_report(a), finish_report(b)});
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header.find("theta") != std::string::npos);
  CHECK(header.find(",j") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("sampler determinism and window") {
  const Grid g = make_grid(1, 512, 8.0, false);
  for (SetFamily fam : {SetFamily::random_cell_unions, SetFamily::nested_cubes, SetFamily::separated_cubes,
                        SetFamily::annuli}) {
    SetPairSampler s1(g, fam, 42, 128, 383), s2(g, fam, 42, 128, 383), s3(g, fam, 43, 128, 383);
    bool differs = false;
    for (int k = 0; k < 10; ++k) {
      const auto [a1, b1] = s1.next_pair();
      const auto [a2, b2] = s2.next_pair();
      const auto [a3, b3] = s3.next_pair();
      CHECK(a1.mask() == a2.mask());
      CHECK(b1.mask() == b2.mask());
      differs = differs || a1.mask() != a3.mask() || b1.mask() != b3.mask();
      CHECK(a1.count() > 0);
      CHECK(b1.count() > 0);
      for (long i = 0; i < g.size(); ++i)
        if (a1.contains(i) || b1.contains(i)) CHECK((i >= 128 && i <= 383));
      if (fam == SetFamily::separated_cubes)
        for (long i = 0; i < g.size(); ++i) CHECK_FALSE((a1.contains(i) && b1.contains(i)));
    }
    CHECK(differs);
    CHECK(set_family_from_string(to_string(fam)) == fam);
  }
  CHECK_THROWS(set_family_from_string("spheres"));
  CHECK_THROWS(SetPairSampler(g, SetFamily::annuli, 1, 0, 3));
}

TEST_CASE("L1 form of the auxiliary estimate is an identity for wide truncations") {
  const Grid g = make_grid(1, 256, 4.0, false);
  const CellSet a = CellSet::box(g, Point::Constant(1, -1.0), Point::Constant(1, 0.5));
  const CellSet b = CellSet::box(g, Point::Constant(1, 0.0), Point::Constant(1, 1.0));
  const auto reps = aux_dyadic_checks(a.indicator(), b.indicator(), 0.4, 2);
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].lhs == doctest::Approx(a.measure() * b.measure()).epsilon(1e-12));
  CHECK(all_passed(reps));
  const auto unit = aux_unit_check(a.indicator(), b.indicator(), 0.4);
  CHECK(unit.passed);
  CHECK(unit.tracked_constant == 75.0);
}

TEST_CASE("annuli estimates on a fixed triple") {
  const Grid g = make_grid(1, 512, 8.0, false);
  const CellSet e = CellSet::box(g, Point::Constant(1, -2.0), Point::Constant(1, 2.0));
  const CellSet a = CellSet::box(g, Point::Constant(1, -1.0), Point::Constant(1, 0.0));
  const CellSet b = CellSet::box(g, Point::Constant(1, 0.5), Point::Constant(1, 3.0));
  for (int j = -3; j <= 2; ++j) {
    const auto reps = annuli_estimate_suite(e, a, b, 0.5, j);
    CHECK(reps.size() == 4);
    CHECK(all_passed(reps));
  }
  const auto range = annuli_estimate_suite_range(e, a, b, 0.5, -3, 2);
  CHECK(range.size() == 24);
}

TEST_CASE("restricted weak-type suite") {
  const Grid g = make_grid(1, 512, 8.0, false);
  const CellSet a = CellSet::box(g, Point::Constant(1, -1.0), Point::Constant(1, 0.0));
  const CellSet b = CellSet::box(g, Point::Constant(1, 0.5), Point::Constant(1, 3.0));
  for (double th : {0.0, 0.5, 1.0}) {
    const auto reps = restricted_weak_type_suite(a, b, 0.5, th);
    REQUIRE(reps.size() == 4);
    CHECK(all_passed(reps));
    CHECK(reps[3].params.at("r") == doctest::Approx(2.0));
  }
}

TEST_CASE("HLS check requires the scaling relation") {
  const Grid g = make_grid(1, 256, 4.0, false);
  const GridFunction f = GridFunction::sample(g, [](const Point& x) { return std::exp(-x.squaredNorm()); }, true);
  // 1/p + 1/q + (1 - alpha) = 2 in 1D with alpha = 1/2.
  const InequalityReport r = hls_check(f, f, 0.5, 4.0 / 3.0, 4.0 / 3.0);
  CHECK(r.passed);
  CHECK(std::isfinite(r.ratio));
  CHECK_THROWS(hls_check(f, f, 0.5, 2.0, 2.0));
  CHECK_THROWS(hls_check(f, f, 0.5, 1.0, 2.0));
}

TEST_CASE("uniform scan refuses points off the interior square") {
  const Grid g = make_grid(1, 128, 4.0, false);
  const GridFunction f = CellSet::box(g, Point::Constant(1, -1.0), Point::Constant(1, 1.0)).indicator();
  const std::vector<std::pair<GridFunction, GridFunction>> pairs{{f, f}};
  CHECK_THROWS_AS(uniform_bound_scan(pairs, ExponentTriple::from_pq(1.0 / 0.3, 1.0 / 0.9, 0.5, 1), {0.5}),
                  std::domain_error);
  ExponentTriple bad = ExponentTriple::from_pq(1.2, 1.2, 0.5, 1);
  bad.r = 1.0;
  CHECK_THROWS_AS(uniform_bound_scan(pairs, bad, {0.5}), std::domain_error);
  const UniformScanReport ok = uniform_bound_scan(pairs, ExponentTriple::from_pq(1.2, 1.2, 0.5, 1), {0.0, 1.0});
  CHECK(ok.rows.size() == 2);
  CHECK(ok.passed);
}

TEST_CASE("blow-up probe on a small grid") {
  BlowupConfig cfg;
  cfg.cells = 2000;
  cfg.epsilons = {1e-1, 1e-2};
  cfg.family = BlowupFamily::smooth_bump;
  const BlowupReport r = boundary_blowup_probe(cfg);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.max_relative_spread < 0.05);
  CHECK(r.growth == doctest::Approx(r.rows[1].ratio / r.rows[0].ratio));
  cfg.epsilons.clear();
  CHECK_THROWS(boundary_blowup_probe(cfg));
}
