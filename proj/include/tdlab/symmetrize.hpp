#pragma once

// Symmetrization maps that send interior mass outside the domain along the
// rays of the boundary projection: the face-wise reflection for convex
// polygons, the radial contraction toward the exterior disk centers for
// round polygons, and the direct exterior map P(x) + c (P(x) - x).

#include <array>
#include <cstddef>

#include "tdlab/fields.hpp"
#include "tdlab/geometry.hpp"
#include "tdlab/raydensity.hpp"

namespace tdlab {

struct SymmetrizationContext {
  Domain domain;
  double diameter = 0.0;  // L, diameter of `domain` itself
  double radius = 0.0;    // r, zero for polygons
  Box enclosing;          // contains the domain and the image of every map

  explicit SymmetrizationContext(Domain d);
};

/// Quadrature points within 1e-9 of a seam between regions are moved 1e-8
/// toward their (lowest-index) boundary point, so every map below is
/// evaluated where the region index is unambiguous.
struct PreparedSource {
  Quadrature quadrature;
  std::size_t seam_points = 0;
};
PreparedSource resolve_seams(const SymmetrizationContext& ctx, const Quadrature& q);

/// Mirror of x across the line supporting its nearest face.
Vec2 reflect_map(const SymmetrizationContext& ctx, const Vec2& x);

/// b + (r - (|x-b| - r) r / (2L)) (x-b)/|x-b| for the nearest center b.
/// Throws DegenerateCenter if |x - b| <= 1e-14.
Vec2 radial_map(const SymmetrizationContext& ctx, const Vec2& x);

struct RadialJacobian {
  double eigenvalue_normal = 0.0;   // -r / (2L)
  double eigenvalue_tangent = 0.0;  // (r / 2L) ((r + 2L)/|x-b| - 1)
  double det = 0.0;                 // |product|
};
RadialJacobian radial_jacobian(const SymmetrizationContext& ctx, const Vec2& x);

/// Row-major 2x2 matrix.
using Mat2 = std::array<double, 4>;

/// Analytic DT of the radial map.
Mat2 radial_jacobian_matrix(const SymmetrizationContext& ctx, const Vec2& x);

// The same formulas for a single given center b, radius r and diameter L.
Vec2 radial_map(const Vec2& b, double r, double L, const Vec2& x);
RadialJacobian radial_jacobian(const Vec2& b, double r, double L, const Vec2& x);
Mat2 radial_jacobian_matrix(const Vec2& b, double r, double L, const Vec2& x);

/// Central-difference Jacobian of an arbitrary map.
Mat2 finite_difference_jacobian(const PointMap& map, const Vec2& x, double step = 1e-5);

inline double det(const Mat2& m) { return m[0] * m[3] - m[1] * m[2]; }

/// r^d / (2^d (r+L)^(d-1) L): lower bound of the radial map's Jacobian.
double jacobian_lower_bound(double r, double L, int d);

/// jacobian_lower_bound^(1/p - 1); p may be infinity.
double lp_constant(double r, double L, int d, double p);

/// P(x) + c (P(x) - x), P the boundary projection (lowest-index tie-break).
Vec2 direct_exterior_map(const Domain& domain, double c, const Vec2& x);

/// Default c = r / (4L) for the direct exterior map.
double default_exterior_c(double r, double L);

/// The map matching the domain kind: reflection or radial.
PointMap symmetrization_map(const SymmetrizationContext& ctx);

/// Jacobian determinant of that map (1 for reflections).
ScalarMap symmetrization_jacobian(const SymmetrizationContext& ctx);

/// Closed-form Kantorovich potentials certifying the maps: +-d(x, boundary)
/// for polygons, min_i |x - b_i| for round polygons.
Potential symmetrization_potential(const SymmetrizationContext& ctx);

/// Boundary projection as a point map (lowest-index tie-break).
PointMap projection_map(const Domain& domain);

struct DeterminantSweep {
  double min_abs_det = 0.0;
  double max_abs_det = 0.0;
  std::size_t samples = 0;
};
/// Finite-difference |det DT| over the given points.
DeterminantSweep determinant_sweep(const PointMap& map, const std::vector<Vec2>& points, double step = 1e-6);

}  // namespace tdlab
