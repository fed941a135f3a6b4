#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "riesz/interpolation.hpp"

#include <cmath>
#include <random>

using namespace riesz;

TEST_CASE("region classification") {
  CHECK(classify_region(5.0 / 6.0, 5.0 / 6.0, 0.5, 1) == RegionLabel::interior_square);
  CHECK(classify_region(0.5, 0.5, 0.5, 1) == RegionLabel::boundary_square);
  CHECK(classify_region(1.0, 0.75, 0.5, 1) == RegionLabel::boundary_square);
  CHECK(classify_region(0.3, 0.9, 0.5, 1) == RegionLabel::interior_pentagon_only);
  CHECK(classify_region(0.25, 0.2, 0.5, 1) == RegionLabel::outside);
  CHECK(classify_region(0.75, 1.2, 0.5, 1) == RegionLabel::outside);
  // 2D, alpha = 1.5: the square starts at 3/4.
  CHECK(classify_region(0.75, 0.75, 1.5, 2) == RegionLabel::boundary_square);
  CHECK(classify_region(0.8, 0.9, 1.5, 2) == RegionLabel::interior_square);
  CHECK(classify_region(0.5, 0.5, 1.5, 2) == RegionLabel::interior_pentagon_only);
  CHECK(to_string(RegionLabel::boundary_square) == "boundary_square");
}

TEST_CASE("vertices are scaling-consistent") {
  const auto v = vertex_triples(0.5, 1);
  CHECK(v[0].inv_p == 1.0);
  CHECK(v[0].inv_r == doctest::Approx(1.5));
  CHECK(v[1].inv_q == doctest::Approx(0.5));
  CHECK(v[3].inv_r == doctest::Approx(0.5));
  for (const auto& p : v) CHECK(p.scaling_consistent(0.5, 1));
  CHECK_THROWS_AS(vertex_triples(1.0, 1), std::invalid_argument);
}

TEST_CASE("barycentric weights match Cramer's rule") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ReciprocalPoint a{1.0, 1.0, 1.5}, b{1.0, 0.5, 1.0}, c{0.5, 0.5, 0.5};
  for (int k = 0; k < 100; ++k) {
    // Uniform point in the triangle.
    double s = u(rng), t = u(rng);
    if (s + t > 1.0) {
      s = 1.0 - s;
      t = 1.0 - t;
    }
    const double x = a.inv_p + s * (b.inv_p - a.inv_p) + t * (c.inv_p - a.inv_p);
    const double y = a.inv_q + s * (b.inv_q - a.inv_q) + t * (c.inv_q - a.inv_q);
    const auto want = oracle::barycentric({x, y}, {a.inv_p, a.inv_q}, {b.inv_p, b.inv_q}, {c.inv_p, c.inv_q});
    const BarycentricResult got = barycentric_solve({x, y, 0.0}, a, b, c);
    for (int i = 0; i < 3; ++i) CHECK(got.theta[i] == doctest::Approx(want[i]).epsilon(1e-12));
    CHECK(got.roundtrip_error <= 1e-12);
    CHECK(got.side_condition);
    CHECK(got.inv_r == doctest::Approx(x + y - 0.5));
  }
}

TEST_CASE("closed-triangle edge cases") {
  const ReciprocalPoint a{1.0, 1.0, 1.5}, b{1.0, 0.5, 1.0}, c{0.5, 0.5, 0.5};
  const BarycentricResult at_vertex = barycentric_solve(b, a, b, c);
  CHECK(at_vertex.theta[1] == doctest::Approx(1.0));
  CHECK_FALSE(at_vertex.interior);
  const BarycentricResult on_edge = barycentric_solve({0.75, 0.75, 0.0}, a, b, c);
  CHECK(on_edge.theta[1] == doctest::Approx(0.0));
  CHECK_FALSE(on_edge.interior);
  CHECK_THROWS_AS(barycentric_solve({0.6, 0.9, 0.0}, a, b, c), std::domain_error);
  CHECK_THROWS_AS(barycentric_solve({0.6, 0.6, 0.0}, a, {0.75, 0.75, 0.0}, c), std::invalid_argument);
}

TEST_CASE("triangle selection") {
  const SquareTriangulation tri = triangulate_square(vertex_triples(0.5, 1));
  CHECK(tri.select({0.9, 0.6, 0.0}) == 0);
  CHECK(tri.select({0.6, 0.9, 0.0}) == 1);
  CHECK(tri.select({0.7, 0.7, 0.0}) == 0);
}

TEST_CASE("interpolated constant at p = q = 6/5") {
  const double c_est = 75.0, pre = std::sqrt(2.0);
  const double c1 = pre * c_est * oracle::c_A1(0.5, 1);
  const double c2 = pre * c_est * oracle::c_A1(0.5, 1);
  const double c4 = pre * c_est * oracle::c_A2(0.5, 1);
  const InterpolatedBound b = interpolate_bound(5.0 / 6.0, 5.0 / 6.0, 0.5, 1, {c1, c2, c2, c4});
  CHECK(b.region == RegionLabel::interior_square);
  CHECK(b.triangle == 0);
  CHECK(b.weights.theta[0] == doctest::Approx(2.0 / 3.0));
  CHECK(b.weights.theta[1] == doctest::Approx(0.0));
  CHECK(b.weights.theta[2] == doctest::Approx(1.0 / 3.0));
  CHECK(b.constant == doctest::Approx(std::pow(c1, 2.0 / 3.0) * std::cbrt(c4)).epsilon(1e-12));
  CHECK(interpolate_bound(5.0 / 6.0, 5.0 / 6.0, 0.5, 1, {c1, c2, c2, c4}, 3.0).constant ==
        doctest::Approx(3.0 * b.constant));
  CHECK_THROWS_AS(interpolate_bound(0.3, 0.9, 0.5, 1, {c1, c2, c2, c4}), std::domain_error);
  CHECK_THROWS_AS(interpolated_constant(1.0, 0.0, 1.0, {0.3, 0.3, 0.4}), std::invalid_argument);
}
