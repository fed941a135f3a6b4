#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "riesz/quadrature.hpp"

#include <cmath>

using namespace riesz;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
  for (int n : {1, 2, 5, 16}) {
    const QuadratureRule q = gauss_legendre(n, 0.0, 2.0);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0.0;
      for (int k = 0; k < q.size(); ++k) s += q.weights[k] * std::pow(q.nodes[k], deg);
      CHECK(s == doctest::Approx(std::pow(2.0, deg + 1) / (deg + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("three-point nodes") {
  const QuadratureRule q = gauss_legendre(3);
  CHECK(q.nodes[0] == doctest::Approx(-std::sqrt(0.6)));
  CHECK(q.nodes[1] == doctest::Approx(0.0));
  CHECK(q.weights[1] == doctest::Approx(8.0 / 9.0));
}

TEST_CASE("theta rules are positive and normalized") {
  for (ThetaRule rule : {ThetaRule::gauss_legendre, ThetaRule::midpoint}) {
    const ThetaQuadrature tq = ThetaQuadrature::make(rule, 7);
    CHECK(tq.count() == 7);
    CHECK(tq.weights.sum() == doctest::Approx(1.0));
    CHECK(tq.weights.minCoeff() > 0.0);
    CHECK(tq.nodes.minCoeff() > 0.0);
    CHECK(tq.nodes.maxCoeff() < 1.0);
  }
  const ThetaQuadrature mid = ThetaQuadrature::make(ThetaRule::midpoint, 4);
  CHECK(mid.nodes[0] == doctest::Approx(0.125));
  // int_0^1 theta^2 (1 - theta)^3 = 1/60
  const ThetaQuadrature std16 = ThetaQuadrature::standard();
  double s = 0.0;
  for (int k = 0; k < std16.count(); ++k) s += std16.weights[k] * std::pow(std16.nodes[k], 2) * std::pow(1 - std16.nodes[k], 3);
  CHECK(s == doctest::Approx(1.0 / 60.0).epsilon(1e-14));
}
