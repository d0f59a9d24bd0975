#include "tdlab/symmetrize.hpp"

#include <algorithm>
#include <cmath>

#include "tdlab/errors.hpp"

namespace tdlab {

namespace {

constexpr double kSeamBand = 1e-9;
constexpr double kSeamShift = 1e-8;

}  // namespace

SymmetrizationContext::SymmetrizationContext(Domain d)
    : domain(std::move(d)),
      diameter(domain.diameter()),
      radius(domain.is_polygon() ? 0.0 : domain.round().radius()),
      enclosing(domain.bounds().inflated(radius + 0.5 * diameter)) {}

PreparedSource resolve_seams(const SymmetrizationContext& ctx, const Quadrature& q) {
  PreparedSource out{q, 0};
  for (Vec2& x : out.quadrature.points) {
    const BoundaryPoint bp = nearest_boundary(ctx.domain, x, kSeamBand);
    if (!bp.tie) continue;
    // Moving toward the winning face's foot point shortens that distance by
    // the full step and every competing distance by strictly less.
    const Vec2 dir = bp.point - x;
    const double n = dir.norm();
    if (n > 0.0) x = x + dir * (kSeamShift / n);
    ++out.seam_points;
  }
  return out;
}

Vec2 reflect_map(const SymmetrizationContext& ctx, const Vec2& x) {
  const BoundaryPoint bp = nearest_boundary(ctx.domain, x);
  if (!ctx.domain.is_polygon()) return bp.point * 2.0 - x;
  // Mirror across the supporting line (not the closest point), which differs
  // only for points whose foot falls beyond a vertex.
  const auto& poly = ctx.domain.polygon();
  const Vec2 n = poly.outward_normal(bp.face);
  const double s = dot(x - poly.face_start(bp.face), n);
  return x - n * (2.0 * s);
}

namespace {

struct RadialFrame {
  Vec2 e;
  double rho;
};

RadialFrame radial_frame(const Vec2& b, const Vec2& x) {
  const double rho = distance(x, b);
  if (rho <= 1e-14) throw DegenerateCenter("point coincides with a disk center");
  return {(x - b) * (1.0 / rho), rho};
}

Vec2 nearest_center(const SymmetrizationContext& ctx, const Vec2& x) {
  if (ctx.domain.is_polygon()) throw InvalidDomain("radial map requires a round polygon");
  const auto& rp = ctx.domain.round();
  return rp.centers()[rp.nearest_center(x).first];
}

}  // namespace

Vec2 radial_map(const Vec2& b, double r, double L, const Vec2& x) {
  const RadialFrame f = radial_frame(b, x);
  return b + f.e * (r - (f.rho - r) / L * (r / 2.0));
}

RadialJacobian radial_jacobian(const Vec2& b, double r, double L, const Vec2& x) {
  const RadialFrame f = radial_frame(b, x);
  RadialJacobian j;
  j.eigenvalue_normal = -r / (2.0 * L);
  j.eigenvalue_tangent = r / (2.0 * L) * ((r + 2.0 * L) / f.rho - 1.0);
  j.det = std::abs(j.eigenvalue_normal * j.eigenvalue_tangent);
  return j;
}

Mat2 radial_jacobian_matrix(const Vec2& b, double r, double L, const Vec2& x) {
  const RadialFrame f = radial_frame(b, x);
  const RadialJacobian j = radial_jacobian(b, r, L, x);
  // DT = mu e e^T + lambda (I - e e^T)
  const double mu = j.eigenvalue_normal;
  const double lam = j.eigenvalue_tangent;
  const double exx = f.e.x * f.e.x, exy = f.e.x * f.e.y, eyy = f.e.y * f.e.y;
  return {mu * exx + lam * (1.0 - exx), (mu - lam) * exy, (mu - lam) * exy, mu * eyy + lam * (1.0 - eyy)};
}

Vec2 radial_map(const SymmetrizationContext& ctx, const Vec2& x) {
  return radial_map(nearest_center(ctx, x), ctx.radius, ctx.diameter, x);
}

RadialJacobian radial_jacobian(const SymmetrizationContext& ctx, const Vec2& x) {
  return radial_jacobian(nearest_center(ctx, x), ctx.radius, ctx.diameter, x);
}

Mat2 radial_jacobian_matrix(const SymmetrizationContext& ctx, const Vec2& x) {
  return radial_jacobian_matrix(nearest_center(ctx, x), ctx.radius, ctx.diameter, x);
}

Mat2 finite_difference_jacobian(const PointMap& map, const Vec2& x, double step) {
  const Vec2 dx = (map(x + Vec2{step, 0.0}) - map(x - Vec2{step, 0.0})) * (0.5 / step);
  const Vec2 dy = (map(x + Vec2{0.0, step}) - map(x - Vec2{0.0, step})) * (0.5 / step);
  return {dx.x, dy.x, dx.y, dy.y};
}

double jacobian_lower_bound(double r, double L, int d) {
  return std::pow(r, d) / (std::pow(2.0, d) * std::pow(r + L, d - 1) * L);
}

double lp_constant(double r, double L, int d, double p) {
  const double exponent = std::isinf(p) ? -1.0 : 1.0 / p - 1.0;
  return std::pow(jacobian_lower_bound(r, L, d), exponent);
}

Vec2 direct_exterior_map(const Domain& domain, double c, const Vec2& x) {
  const Vec2 p = nearest_boundary(domain, x).point;
  return p + (p - x) * c;
}

double default_exterior_c(double r, double L) { return r / (4.0 * L); }

PointMap symmetrization_map(const SymmetrizationContext& ctx) {
  if (ctx.domain.is_polygon()) return [&ctx](const Vec2& x) { return reflect_map(ctx, x); };
  return [&ctx](const Vec2& x) { return radial_map(ctx, x); };
}

ScalarMap symmetrization_jacobian(const SymmetrizationContext& ctx) {
  if (ctx.domain.is_polygon()) return [](const Vec2&) { return 1.0; };
  return [&ctx](const Vec2& x) { return radial_jacobian(ctx, x).det; };
}

Potential symmetrization_potential(const SymmetrizationContext& ctx) {
  if (ctx.domain.is_polygon()) {
    return {[&ctx](const Vec2& x) { return signed_distance(ctx.domain, x); }, 1.0};
  }
  return {[&ctx](const Vec2& x) { return ctx.domain.round().nearest_center(x).second; }, 1.0};
}

PointMap projection_map(const Domain& domain) {
  return [&domain](const Vec2& x) { return nearest_boundary(domain, x).point; };
}

DeterminantSweep determinant_sweep(const PointMap& map, const std::vector<Vec2>& points, double step) {
  DeterminantSweep out;
  out.min_abs_det = kInfinity;
  for (const Vec2& x : points) {
    const double d = std::abs(det(finite_difference_jacobian(map, x, step)));
    out.min_abs_det = std::min(out.min_abs_det, d);
    out.max_abs_det = std::max(out.max_abs_det, d);
    ++out.samples;
  }
  if (out.samples == 0) out.min_abs_det = 0.0;
  return out;
}

}  // namespace tdlab
