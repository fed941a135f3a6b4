#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "riesz/operators.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

using namespace riesz;

namespace {

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

GridFunction interval(const Grid& g, double a, double b) {
  return CellSet::box(g, Point::Constant(g.dim(), a), Point::Constant(g.dim(), b)).indicator();
}

GridFunction gaussian(const Grid& g, double s, double shift = 0.0) {
  return GridFunction::sample(
      g, [=](const Point& x) { return std::exp(-(x.array() - shift).square().sum() / (s * s)); }, true);
}

GridFunction periodic_density(const Grid& g) {
  return GridFunction::sample(
      g,
      [](const Point& x) {
        double v = 1.0;
        for (int a = 0; a < x.size(); ++a) v *= std::cos(2 * std::numbers::pi * x[a]);
        return 1.0 + 0.5 * v + 0.2 * std::sin(2 * std::numbers::pi * x[0] + 0.3);
      },
      true);
}

}  // namespace

TEST_CASE("Riesz potential of an interval matches the closed form at cell centers") {
  const Grid g = make_grid(1, 256, 2.0, false);
  const GridFunction chi = interval(g, -0.5, 0.75);
  for (double alpha : {0.3, 0.5, 0.8}) {
    const GridFunction pot = riesz_potential(chi, alpha);
    double worst = 0.0;
    for (long i = 0; i < g.size(); ++i) {
      const double x = g.center(i)[0];
      worst = std::max(worst, std::abs(pot[i] - oracle::interval_potential(x, -0.5, 0.75, alpha)));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("endpoint theta values reduce to the linear potential") {
  const Grid g = make_grid(1, 128, 3.0, false);
  const GridFunction f = gaussian(g, 0.5, 0.3), h = gaussian(g, 0.7, -0.2);
  const OperatorParams p0{0.5, 0.0, 1}, p1{0.5, 1.0, 1};
  const Eigen::VectorXd at0 = h.values().cwiseProduct(riesz_potential(f, 0.5).values());
  const Eigen::VectorXd at1 = f.values().cwiseProduct(riesz_potential(h, 0.5).values());
  CHECK(max_abs_diff(bilinear_op(f, h, p0).values(), at0) < 1e-12 * at0.cwiseAbs().maxCoeff());
  CHECK(max_abs_diff(bilinear_op(f, h, p1).values(), at1) < 1e-12 * at1.cwiseAbs().maxCoeff());
  // Pointwise evaluation agrees with the full sweep.
  const OperatorParams ph{0.5, 0.4, 1};
  const GridFunction full = bilinear_op(f, h, ph);
  for (long c : {0L, 50L, 127L}) CHECK(bilinear_op_at(f, h, ph, c) == doctest::Approx(full[c]).epsilon(1e-12));
}

TEST_CASE("integral of the bilinear operator is theta independent") {
  const Grid g = make_grid(1, 512, 2.0, false);
  const GridFunction a = interval(g, 0.0, 1.0), b = interval(g, -0.5, 0.25);
  const double exact = oracle::interval_pair_integral(0.0, 1.0, -0.5, 0.25, 0.5);
  for (double th : {0.0, 0.3, 0.5, 1.0}) CHECK(integral(bilinear_op(a, b, OperatorParams{0.5, th, 1})) == doctest::Approx(exact).epsilon(1e-4));
}

TEST_CASE("unit truncation measures the sheared interval intersection") {
  const Grid g = make_grid(1, 1024, 4.0, false);
  const GridFunction a = interval(g, -1.0, 0.5), b = interval(g, 0.0, 2.0);
  for (double th : {0.0, 0.25, 0.5, 1.0}) {
    const GridFunction t = truncated_unit(a, b, th);
    double worst = 0.0;
    for (long i = 0; i < g.size(); ++i) {
      const double x = g.center(i)[0];
      worst = std::max(worst, std::abs(t[i] - oracle::sheared_interval_measure(x, th, -1.0, 0.5, 0.0, 2.0, 1.0)));
    }
    // Interpolated indicators blur edges over one cell.
    CHECK(worst <= 2.0 * g.spacing());
    const double exact_l1 = [&] {
      double s = 0.0;
      const int n = 20000;
      for (int k = 0; k < n; ++k) {
        const double x = -4.0 + 8.0 * (k + 0.5) / n;
        s += oracle::sheared_interval_measure(x, th, -1.0, 0.5, 0.0, 2.0, 1.0) * 8.0 / n;
      }
      return s;
    }();
    // Cells are kept when their centers lie in the ball, an O(h) change of radius.
    CHECK(std::abs(integral(t) - exact_l1) <= g.spacing());
  }
}

TEST_CASE("dyadic family matches single truncations") {
  const Grid g = make_grid(1, 256, 8.0, false);
  const GridFunction f = gaussian(g, 1.0), h = interval(g, -1.0, 2.0);
  const auto fam = truncated_dyadic_family(f, h, 0.3, -2, 2);
  REQUIRE(fam.size() == 5);
  for (int j = -2; j <= 2; ++j) {
    const GridFunction one = truncated_dyadic(f, h, 0.3, j);
    CHECK(max_abs_diff(fam[j + 2].values(), one.values()) <= 1e-12 * one.values().cwiseAbs().maxCoeff());
  }
  // Nested balls give monotone truncations for nonnegative inputs.
  for (int k = 1; k < 5; ++k) CHECK((fam[k].values() - fam[k - 1].values()).minCoeff() >= -1e-14);
  CHECK(max_abs_diff(fam[2].values(), truncated_unit(f, h, 0.3).values()) <= 1e-14);
}

TEST_CASE("dyadic envelope dominates the operator on nonnegative inputs") {
  const Grid g = make_grid(1, 256, 4.0, false);
  const GridFunction f = gaussian(g, 0.5), h = gaussian(g, 0.8, 0.5);
  const OperatorParams p{0.5, 0.5, 1};
  const GridFunction env = dyadic_envelope(f, h, p, default_dyadic_range(g));
  const GridFunction op = bilinear_op(f, h, p);
  CHECK((env.values() - op.values()).minCoeff() >= -1e-12);
  // On the shell 2^{j-1} < |y| <= 2^j the envelope weight is at most 2^{d-alpha} / (1 - 2^{alpha-d}) times the kernel.
  const double factor = std::pow(2.0, 0.5) / (1.0 - std::pow(2.0, -0.5));
  CHECK((env.values().array() <= factor * op.values().array() * (1 + 1e-12)).all());
}

TEST_CASE("tensor S is symmetric positive semidefinite") {
  const Grid g = make_grid(2, 24, 0.5, true);
  const GridFunction rho = periodic_density(g);
  const SymTensorField s = tensor_S(rho, OperatorParams{1.0, 0.0, 2}, ThetaQuadrature::standard());
  CHECK(s.min_eigenvalues().minCoeff() >= -1e-12 * s.max_abs());
  const SmallMatrix m = s.at(17);
  CHECK(m(0, 1) == m(1, 0));
  // Trace equals the theta average of the bilinear operator.
  const GridFunction avg = theta_averaged_bilinear(rho, rho, OperatorParams{1.0, 0.0, 2}, ThetaQuadrature::standard());
  CHECK(max_abs_diff(s.trace().values(), 0.5 * avg.values()) <= 1e-12 * avg.values().maxCoeff());
}

TEST_CASE("constant density approaches the closed-form tensor") {
  // 1D: S = rho^2 / 2 int_{-1/2}^{1/2} |y|^{alpha-1} dy; the periodic cube
  // weights the wrap-around cell by half, which costs O(h^2).
  for (double alpha : {0.25, 0.5, 0.75}) {
    const double exact = 0.5 * 4.0 * 2.0 * std::pow(0.5, alpha) / alpha;
    std::vector<double> err;
    for (long n : {64L, 128L}) {
      const Grid g = make_grid(1, n, 0.5, true);
      const SymTensorField s = tensor_S(GridFunction::constant(g, 2.0), OperatorParams{alpha, 0.0, 1},
                                        ThetaQuadrature::standard());
      CHECK(s.entry(0, 0).maxCoeff() - s.entry(0, 0).minCoeff() <= 1e-12 * exact);
      err.push_back(std::abs(s.entry(0, 0)[0] - exact) / exact);
    }
    CHECK(err[0] < 1e-4);
    CHECK(err[1] < err[0] / 3.5);
  }
}

TEST_CASE("J at a single cell agrees with the field") {
  const Grid g = make_grid(2, 16, 0.5, true);
  const GridFunction f = periodic_density(g);
  const GridFunction h = GridFunction::constant(g, 1.0);
  const OperatorParams p{0.7, 0.0, 2};
  const ThetaQuadrature tq = ThetaQuadrature::make(ThetaRule::gauss_legendre, 4);
  const SymTensorField j = tensor_J(f, h, p, tq);
  const SmallMatrix one = tensor_J_at(f, h, p, tq, 100);
  CHECK((one - j.at(100)).cwiseAbs().maxCoeff() <= 1e-12 * j.max_abs());
}

TEST_CASE("custom profile reproduces the Riesz tensor") {
  const Grid g = make_grid(1, 64, 0.5, true);
  const GridFunction rho = periodic_density(g);
  const double alpha = 0.5;
  const KernelProfile prof = KernelProfile::custom([=](double s) { return -std::pow(s, alpha - 2.0); }, "riesz-copy");
  const ThetaQuadrature tq = ThetaQuadrature::standard();
  const SymTensorField a = tensor_S(rho, OperatorParams{alpha, 0.0, 1}, tq);
  const SymTensorField b = general_radial_tensor(rho, prof, alpha, tq);
  CHECK(max_abs_diff(a.entry(0, 0), b.entry(0, 0)) <= 1e-8 * a.max_abs());
}

TEST_CASE("shear identity converges") {
  std::vector<double> err;
  for (long n : {32L, 64L, 128L}) {
    const Grid g = make_grid(1, n, 0.5, true);
    const GridFunction f = periodic_density(g);
    const ShearIdentity s = shear_identity(f, {n / 8, 0, 0}, ThetaQuadrature::standard(), FdScheme::centered4);
    err.push_back(max_abs_diff(s.lhs.values(), s.rhs.values()) / s.lhs.values().cwiseAbs().maxCoeff());
  }
  CHECK(err[2] < err[1]);
  CHECK(err[1] < err[0]);
  CHECK(err[2] < 1e-3);
}

TEST_CASE("constant periodic density feels no force") {
  const Grid g = make_grid(2, 16, 0.5, true);
  const GridFunction rho = GridFunction::constant(g, 1.5);
  const OperatorParams p{1.0, 0.0, 2};
  const VectorField direct = interaction_force_direct(rho, p);
  const VectorField div = interaction_force_divergence(rho, p, ThetaQuadrature::standard(), FdScheme::centered2);
  for (int a = 0; a < 2; ++a) {
    CHECK(direct.components[a].cwiseAbs().maxCoeff() < 1e-12);
    CHECK(div.components[a].cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("direct and divergence forces agree at second order") {
  std::vector<double> gaps;
  for (long n : {64L, 128L, 256L}) {
    const Grid g = make_grid(1, n, 0.5, true);
    gaps.push_back(force_form_gap(periodic_density(g), OperatorParams{0.5, 0.0, 1}, ThetaQuadrature::standard(),
                                  FdScheme::centered2));
  }
  CHECK(gaps[0] / gaps[1] > 3.5);
  CHECK(gaps[1] / gaps[2] > 3.5);
}

TEST_CASE("custom profile reproduces the Riesz tensor in two dimensions") {
  const Grid g = make_grid(2, 16, 0.5, true);
  const GridFunction rho = periodic_density(g);
  const double alpha = 1.2;
  const KernelProfile prof = KernelProfile::custom([=](double s) { return -std::pow(s, alpha - 3.0); });
  const ThetaQuadrature tq = ThetaQuadrature::make(ThetaRule::gauss_legendre, 6);
  const SymTensorField a = tensor_S(rho, OperatorParams{alpha, 0.0, 2}, tq);
  const SymTensorField b = general_radial_tensor(rho, prof, alpha, tq);
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) CHECK(max_abs_diff(a.entry(i, j), b.entry(i, j)) <= 1e-6 * a.max_abs());
}
