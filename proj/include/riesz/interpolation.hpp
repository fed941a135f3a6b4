#pragma once

#include <array>
#include <string>

namespace riesz {

// Point (1/p, 1/q, 1/r) of the exponent diagram.
struct ReciprocalPoint {
  double inv_p = 0.0;
  double inv_q = 0.0;
  double inv_r = 0.0;

  double scaling_defect(double alpha, int dim) const { return inv_p + inv_q - inv_r - alpha / dim; }
  bool scaling_consistent(double alpha, int dim, double tol = 1e-12) const;
};

enum class RegionLabel { interior_square, interior_pentagon_only, boundary_square, outside };
std::string to_string(RegionLabel label);

// Square with corners (a/d, a/d), (a/d, 1), (1, a/d), (1, 1) and pentagon
// {0 < x < 1, 0 < y < 1, x + y > a/d} in the (1/p, 1/q) plane, decided with
// tolerance 1e-12.
RegionLabel classify_region(double inv_p, double inv_q, double alpha, int dim);

// (p, q) = (1, 1), (1, d/a), (d/a, 1), (d/a, d/a) with r from the scaling
// relation.
std::array<ReciprocalPoint, 4> vertex_triples(double alpha, int dim);

struct BarycentricResult {
  std::array<double, 3> theta{0, 0, 0};
  // All weights strictly positive (beyond tolerance).
  bool interior = false;
  // 1/r of the convex combination of the vertex 1/r values.
  double inv_r = 0.0;
  // 1/r <= 1/r1 + 1/r2 + 1/r3.
  bool side_condition = false;
  // Max deviation of the recombined (1/p, 1/q) from the target.
  double roundtrip_error = 0.0;
};

// Weights of target in the closed triangle (v1, v2, v3) of the (1/p, 1/q)
// plane. Throws std::invalid_argument for collinear vertices and
// std::domain_error when the target lies outside the triangle.
BarycentricResult barycentric_solve(const ReciprocalPoint& target, const ReciprocalPoint& v1,
                                    const ReciprocalPoint& v2, const ReciprocalPoint& v3, double tol = 1e-12);

// Split of the square along the diagonal v1-v4 into (v1, v2, v4) and
// (v1, v3, v4); vertices in vertex_triples order.
struct SquareTriangulation {
  std::array<ReciprocalPoint, 4> vertices;
  std::array<std::array<int, 3>, 2> triangles{{{0, 1, 3}, {0, 2, 3}}};

  // Triangle containing the target; points on the diagonal go to triangle 0.
  int select(const ReciprocalPoint& target) const;
};
SquareTriangulation triangulate_square(const std::array<ReciprocalPoint, 4>& vertices);

// c1^t1 c2^t2 c3^t3.
double interpolated_constant(double c1, double c2, double c3, const std::array<double, 3>& theta);

struct InterpolatedBound {
  RegionLabel region = RegionLabel::outside;
  int triangle = 0;
  std::array<int, 3> vertex_ids{0, 0, 0};
  BarycentricResult weights;
  double geometric_mean = 0.0;
  // Structural multiplier of the interpolation theorem; configuration, not
  // derived (defaults to 1).
  double structural_multiplier = 1.0;
  double constant = 0.0;
};

// Interpolated bound at (1/p, 1/q) inside the square from the four vertex
// constants. Throws std::domain_error (message carries the region label)
// outside the closed square.
InterpolatedBound interpolate_bound(double inv_p, double inv_q, double alpha, int dim,
                                    const std::array<double, 4>& vertex_constants,
                                    double structural_multiplier = 1.0);

}  // namespace riesz
