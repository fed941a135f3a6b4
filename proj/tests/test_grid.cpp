#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "riesz/grid.hpp"
#include "riesz/grid_io.hpp"
#include "riesz/summation.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace riesz;

TEST_CASE("grid geometry and indexing") {
  const Grid g = make_grid(2, 8, 1.0, false);
  CHECK(g.size() == 64);
  CHECK(g.spacing() == doctest::Approx(0.25));
  CHECK(g.cell_volume() == doctest::Approx(0.0625));
  CHECK(g.center(0, 0) == doctest::Approx(-0.875));
  for (long i = 0; i < g.size(); ++i) CHECK(g.ravel(g.unravel(i)) == i);
  // Last axis fastest.
  CHECK(g.ravel({1, 0, 0}) == 8);
  CHECK_THROWS_AS(make_grid(4, 8, 1.0, false), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, 1, 1.0, false), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, 8, -1.0, false), std::invalid_argument);
}

TEST_CASE("grid function validation") {
  const Grid g = make_grid(1, 4, 1.0, false);
  CHECK_THROWS_AS(GridFunction(g, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(4);
  v[2] = NAN;
  CHECK_THROWS_AS(GridFunction(g, v), std::invalid_argument);
  v[2] = -1.0;
  CHECK_THROWS_AS(GridFunction(g, v, true), std::invalid_argument);
}

TEST_CASE("norms of a step function") {
  const Grid g = make_box_grid(1, 4, 0.0, 4.0, false);
  const GridFunction f(g, Eigen::Vector4d(3.0, -1.0, 1.0, 1.0));
  CHECK(integral(f) == doctest::Approx(4.0));
  CHECK(lebesgue_norm(f, 1.0) == doctest::Approx(6.0));
  CHECK(lebesgue_norm(f, 2.0) == doctest::Approx(std::sqrt(12.0)));
  CHECK(lebesgue_norm(f, 3.0) == doctest::Approx(std::cbrt(30.0)));
  CHECK(lebesgue_norm(f, INFINITY) == doctest::Approx(3.0));
  // sup_t t |{|f| > t}|^{1/r} over the distribution levels 3 (measure 1) and 1 (measure 4).
  CHECK(weak_norm(f, 1.0) == doctest::Approx(4.0));
  CHECK(weak_norm(f, 2.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(lebesgue_norm(f, 0.0), std::invalid_argument);
}

TEST_CASE("weak norm sits below the strong norm and below its upper surrogate") {
  const Grid g = make_grid(1, 256, 4.0, false);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Eigen::VectorXd v(g.size());
  for (auto& x : v) x = u(rng);
  const GridFunction f(g, v, true);
  for (double r : {1.0, 1.5, 2.0, 4.0}) {
    const double w = weak_norm(f, r);
    CHECK(w <= lebesgue_norm(f, r) * (1 + 1e-12));
    CHECK(w <= weak_norm_upper(f, r, 0.5 * r) * (1 + 1e-12));
  }
}

TEST_CASE("cell sets") {
  const Grid g = make_grid(1, 16, 1.0, false);
  const CellSet a = CellSet::box(g, Point::Constant(1, -0.5), Point::Constant(1, 0.5));
  CHECK(a.count() == 8);
  CHECK(a.measure() == doctest::Approx(1.0));
  const CellSet b = CellSet::box(g, Point::Constant(1, 0.0), Point::Constant(1, 1.0));
  CHECK(a.set_union(b).count() == 12);
  CHECK(a.set_difference(b).count() == 4);
  CHECK(integral(a.indicator()) == doctest::Approx(a.measure()));
  CHECK(CellSet::empty(g).count() == 0);
}

TEST_CASE("dyadic dilation of an aligned step function is exact") {
  const Grid g = make_grid(1, 64, 2.0, false);
  const GridFunction f =
      CellSet::box(g, Point::Constant(1, -0.25), Point::Constant(1, 0.25)).indicator();
  // f(2x) is the indicator of [-1/8, 1/8]; f(x/2) of [-1/2, 1/2].
  const GridFunction up = dyadic_dilate(f, 1);
  const GridFunction down = dyadic_dilate(f, -1);
  CHECK(integral(up) == doctest::Approx(0.25));
  CHECK(integral(down) == doctest::Approx(1.0));
  const GridFunction back = dyadic_dilate(down, 1);
  CHECK((back.values() - f.values()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("rescale dilation scales norms by the Jacobian") {
  const Grid g = make_grid(2, 16, 1.0, false);
  const GridFunction f = GridFunction::sample(g, [](const Point& x) { return std::exp(-x.squaredNorm()); });
  for (int k : {-2, 1, 3}) {
    const GridFunction fk = rescale_dilate(f, k);
    CHECK(lebesgue_norm(fk, 2.0) == doctest::Approx(lebesgue_norm(f, 2.0) * std::pow(2.0, -k * 2 / 2.0)));
  }
}

TEST_CASE("exponent triples follow the scaling relation") {
  const ExponentTriple t = ExponentTriple::from_pq(1.2, 1.2, 0.5, 1);
  CHECK(t.r == doctest::Approx(6.0 / 7.0).epsilon(1e-14));
  CHECK(t.scaling_consistent());
  CHECK_THROWS_AS(ExponentTriple::from_pq(1.0, 1.0, 2.5, 1), std::invalid_argument);
}

TEST_CASE("grid file round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "riesz_test_grid";
  std::filesystem::create_directories(dir);
  const Grid g = make_grid(2, 6, 0.5, true);
  const GridFunction f = GridFunction::sample(g, [](const Point& x) { return std::sin(7 * x[0]) + x[1]; });
  const Eigen::VectorXd other = f.values() * 3.0;
  write_grid_file(dir / "a.grid", g, {{"f", f.values()}, {"g", other}});
  const GridFile file = read_grid_file(dir / "a.grid");
  CHECK(file.grid.same_layout(g));
  CHECK(file.channel("f") == f.values());
  CHECK(file.channel("g") == other);
  CHECK_THROWS_AS(file.channel("h"), std::out_of_range);
  CHECK(read_grid_function(dir / "a.grid", "g").values() == other);

  {
    std::ifstream in(dir / "a.grid", std::ios::binary);
    std::string header;
    std::getline(in, header);
    std::ofstream out(dir / "b.grid", std::ios::binary);
    out << header << '\n' << "short";
  }
  CHECK_THROWS_AS(read_grid_file(dir / "b.grid"), std::runtime_error);
  CHECK_THROWS_AS(read_grid_file(dir / "missing.grid"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("compensated sum recovers cancelled terms") {
  CompensatedSum<> s;
  s.add(1.0);
  s.add(1e-16);
  s.add(-1.0);
  CHECK(s.value() == doctest::Approx(1e-16).epsilon(1e-12));
  double naive = 0.0;
  CompensatedSum<> c;
  for (int k = 0; k < 1000000; ++k) {
    naive += 0.1;
    c += 0.1;
  }
  CHECK(std::abs(c.value() - 100000.0) < std::abs(naive - 100000.0));
}
