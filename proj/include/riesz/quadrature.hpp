#pragma once

#include <Eigen/Core>

namespace riesz {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

// n-point Gauss-Legendre rule on [lo, hi] (Golub-Welsch).
QuadratureRule gauss_legendre(int n, double lo = -1.0, double hi = 1.0);

enum class ThetaRule { gauss_legendre, midpoint };

// Rule for integrals over theta in [0, 1]; weights are positive and sum to 1.
struct ThetaQuadrature {
  ThetaRule rule;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  static ThetaQuadrature make(ThetaRule rule, int count);
  static ThetaQuadrature standard() { return make(ThetaRule::gauss_legendre, 16); }
  int count() const { return static_cast<int>(nodes.size()); }
};

}  // namespace riesz
