#include "riesz/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace riesz {

QuadratureRule gauss_legendre(int n, double lo, double hi) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  const Eigen::VectorXd& x = es.eigenvalues();
  QuadratureRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  // Symmetrize so the rule is exactly mirror-symmetric about the midpoint.
  for (int i = 0; i < n; ++i) {
    const int j = n - 1 - i;
    const double xi = 0.5 * (x[i] - x[j]);
    const double v0 = es.eigenvectors()(0, i);
    const double v1 = es.eigenvectors()(0, j);
    rule.nodes[i] = mid + half * xi;
    rule.weights[i] = half * (v0 * v0 + v1 * v1);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = mid;
  return rule;
}

ThetaQuadrature ThetaQuadrature::make(ThetaRule rule, int count) {
  if (count < 1) throw std::invalid_argument("theta quadrature needs at least one node");
  ThetaQuadrature q{rule, Eigen::VectorXd(count), Eigen::VectorXd(count)};
  if (rule == ThetaRule::midpoint) {
    for (int i = 0; i < count; ++i) {
      q.nodes[i] = (i + 0.5) / count;
      q.weights[i] = 1.0 / count;
    }
  } else {
    const auto gl = gauss_legendre(count, 0.0, 1.0);
    q.nodes = gl.nodes;
    q.weights = gl.weights / gl.weights.sum();
  }
  return q;
}

}  // namespace riesz
