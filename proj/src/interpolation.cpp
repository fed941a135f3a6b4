#include "riesz/interpolation.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace riesz {

namespace {
constexpr double kTol = 1e-12;
}

bool ReciprocalPoint::scaling_consistent(double alpha, int dim, double tol) const {
  return std::abs(scaling_defect(alpha, dim)) <= tol;
}

std::string to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::interior_square: return "interior_square";
    case RegionLabel::interior_pentagon_only: return "interior_pentagon_only";
    case RegionLabel::boundary_square: return "boundary_square";
    case RegionLabel::outside: return "outside";
  }
  return "outside";
}

RegionLabel classify_region(double x, double y, double alpha, int dim) {
  const double s = alpha / dim;
  auto open_in = [&](double v) { return v > s + kTol && v < 1.0 - kTol; };
  auto closed_in = [&](double v) { return v >= s - kTol && v <= 1.0 + kTol; };
  if (open_in(x) && open_in(y)) return RegionLabel::interior_square;
  if (closed_in(x) && closed_in(y)) return RegionLabel::boundary_square;
  const bool pentagon = x > kTol && x < 1.0 - kTol && y > kTol && y < 1.0 - kTol && x + y > s + kTol;
  return pentagon ? RegionLabel::interior_pentagon_only : RegionLabel::outside;
}

std::array<ReciprocalPoint, 4> vertex_triples(double alpha, int dim) {
  if (!(alpha > 0.0 && alpha < dim)) throw std::invalid_argument("alpha must lie in (0, d)");
  const double s = alpha / dim;
  auto make = [&](double x, double y) { return ReciprocalPoint{x, y, x + y - s}; };
  return {make(1.0, 1.0), make(1.0, s), make(s, 1.0), make(s, s)};
}

BarycentricResult barycentric_solve(const ReciprocalPoint& target, const ReciprocalPoint& v1,
                                    const ReciprocalPoint& v2, const ReciprocalPoint& v3, double tol) {
  Eigen::Matrix3d m;
  m << v1.inv_p, v2.inv_p, v3.inv_p, v1.inv_q, v2.inv_q, v3.inv_q, 1.0, 1.0, 1.0;
  const double area = (v2.inv_p - v1.inv_p) * (v3.inv_q - v1.inv_q) - (v3.inv_p - v1.inv_p) * (v2.inv_q - v1.inv_q);
  const double scale = std::max({std::abs(v2.inv_p - v1.inv_p), std::abs(v3.inv_p - v1.inv_p),
                                 std::abs(v2.inv_q - v1.inv_q), std::abs(v3.inv_q - v1.inv_q), 1e-300});
  if (std::abs(area) <= 1e-12 * scale * scale) throw std::invalid_argument("triangle vertices are collinear");
  const Eigen::Vector3d rhs(target.inv_p, target.inv_q, 1.0);
  const Eigen::Vector3d t = m.partialPivLu().solve(rhs);
  BarycentricResult r;
  for (int i = 0; i < 3; ++i) {
    if (t[i] < -tol)
      throw std::domain_error("target (" + std::to_string(target.inv_p) + ", " + std::to_string(target.inv_q) +
                              ") lies outside the triangle");
    r.theta[i] = std::max(0.0, t[i]);
  }
  const double sum = r.theta[0] + r.theta[1] + r.theta[2];
  for (double& v : r.theta) v /= sum;
  r.interior = r.theta[0] > tol && r.theta[1] > tol && r.theta[2] > tol;
  r.inv_r = r.theta[0] * v1.inv_r + r.theta[1] * v2.inv_r + r.theta[2] * v3.inv_r;
  r.side_condition = r.inv_r <= v1.inv_r + v2.inv_r + v3.inv_r + tol;
  const double px = r.theta[0] * v1.inv_p + r.theta[1] * v2.inv_p + r.theta[2] * v3.inv_p;
  const double py = r.theta[0] * v1.inv_q + r.theta[1] * v2.inv_q + r.theta[2] * v3.inv_q;
  r.roundtrip_error = std::max(std::abs(px - target.inv_p), std::abs(py - target.inv_q));
  return r;
}

int SquareTriangulation::select(const ReciprocalPoint& target) const {
  // Signed side of the v1-v4 diagonal; triangle 0 holds v2.
  const auto& a = vertices[0];
  const auto& b = vertices[3];
  auto side = [&](const ReciprocalPoint& p) {
    return (b.inv_p - a.inv_p) * (p.inv_q - a.inv_q) - (b.inv_q - a.inv_q) * (p.inv_p - a.inv_p);
  };
  const double s_target = side(target);
  const double s_v2 = side(vertices[1]);
  if (std::abs(s_target) <= kTol) return 0;
  return (s_target > 0) == (s_v2 > 0) ? 0 : 1;
}

SquareTriangulation triangulate_square(const std::array<ReciprocalPoint, 4>& vertices) {
  SquareTriangulation t;
  t.vertices = vertices;
  return t;
}

double interpolated_constant(double c1, double c2, double c3, const std::array<double, 3>& theta) {
  if (!(c1 > 0.0 && c2 > 0.0 && c3 > 0.0)) throw std::invalid_argument("vertex constants must be positive");
  return std::exp(theta[0] * std::log(c1) + theta[1] * std::log(c2) + theta[2] * std::log(c3));
}

InterpolatedBound interpolate_bound(double inv_p, double inv_q, double alpha, int dim,
                                    const std::array<double, 4>& vertex_constants, double structural_multiplier) {
  InterpolatedBound out;
  out.region = classify_region(inv_p, inv_q, alpha, dim);
  if (out.region != RegionLabel::interior_square && out.region != RegionLabel::boundary_square)
    throw std::domain_error("exponent point lies in region " + to_string(out.region));
  const auto tri = triangulate_square(vertex_triples(alpha, dim));
  const ReciprocalPoint target{inv_p, inv_q, inv_p + inv_q - alpha / dim};
  out.triangle = tri.select(target);
  out.vertex_ids = tri.triangles[out.triangle];
  out.weights = barycentric_solve(target, tri.vertices[out.vertex_ids[0]], tri.vertices[out.vertex_ids[1]],
                                  tri.vertices[out.vertex_ids[2]]);
  out.geometric_mean = interpolated_constant(vertex_constants[out.vertex_ids[0]], vertex_constants[out.vertex_ids[1]],
                                             vertex_constants[out.vertex_ids[2]], out.weights.theta);
  out.structural_multiplier = structural_multiplier;
  out.constant = structural_multiplier * out.geometric_mean;
  return out;
}

}  // namespace riesz
