#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "tdlab/errors.hpp"
#include "tdlab/fields.hpp"
#include "tdlab/geometry.hpp"
#include "tdlab/symmetrize.hpp"

using namespace tdlab;

namespace {

const ConvexPolygon kSquare({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}});

void check_point(const Vec2& got, const Vec2& want, double tol = 1e-12) {
  CHECK(got.x == doctest::Approx(want.x).epsilon(tol).scale(1.0));
  CHECK(got.y == doctest::Approx(want.y).epsilon(tol).scale(1.0));
}

std::vector<Vec2> interior_samples(const Domain& d, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Box b = d.bounds();
  std::uniform_real_distribution<double> ux(b.lo.x, b.hi.x), uy(b.lo.y, b.hi.y);
  std::vector<Vec2> out;
  while (out.size() < n) {
    const Vec2 x{ux(rng), uy(rng)};
    if (d.contains(x) && nearest_boundary(d, x).gap > 1e-9) out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("reflect_map") {
  const SymmetrizationContext sq{Domain(kSquare)};
  check_point(reflect_map(sq, {0.5, 0.2}), {0.5, -0.2});
  check_point(reflect_map(sq, {0.1, 0.4}), {-0.1, 0.4});

  const SymmetrizationContext tri{Domain(ConvexPolygon({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}))};
  const Vec2 x{0.4, 0.4};
  const Vec2 r = reflect_map(tri, x);
  check_point(r, {0.6, 0.6});
  CHECK(distance(x, r) == doctest::Approx(2.0 * std::abs(x.x + x.y - 1.0) / std::sqrt(2.0)));
}

TEST_CASE("radial_map") {
  const Vec2 b{0.0, 0.0};
  check_point(radial_map(b, 1.0, 2.0, {2.0, 0.0}), {0.75, 0.0});
  const Vec2 on_arc{std::cos(0.3), std::sin(0.3)};
  check_point(radial_map(b, 1.0, 2.0, on_arc), on_arc);
  CHECK_THROWS_AS(radial_map(b, 1.0, 2.0, {0.0, 0.0}), DegenerateCenter);

  // |x - T(x)| / (|x - b| - r) = 1 + r / (2L) on a real round polygon.
  const SymmetrizationContext ctx{Domain(round_approximate(kSquare, 0.5, 0.25))};
  const double r = ctx.radius, L = ctx.diameter;
  for (const Vec2& x : interior_samples(ctx.domain, 1000, 3)) {
    const auto [i, rho] = ctx.domain.round().nearest_center(x);
    CHECK(distance(x, radial_map(ctx, x)) / (rho - r) == doctest::Approx(1.0 + r / (2.0 * L)).epsilon(1e-9));
  }
}

TEST_CASE("radial_jacobian eigenvalues") {
  const Vec2 b{0.0, 0.0};
  const double r = 1.0, L = 2.0;
  CHECK(radial_jacobian(b, r, L, {r, 0.0}).eigenvalue_tangent == doctest::Approx(1.0));
  CHECK(radial_jacobian(b, r, L, {0.0, r + L}).eigenvalue_tangent == doctest::Approx(r / (2.0 * (r + L))));
  CHECK(radial_jacobian(b, r, L, {0.0, 1.7}).eigenvalue_normal == doctest::Approx(-r / (2.0 * L)));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> urho(r, r + L), uang(0.0, 2.0 * M_PI);
  for (int k = 0; k < 100; ++k) {
    const double rho = urho(rng), a = uang(rng);
    const Vec2 x{rho * std::cos(a), rho * std::sin(a)};
    const Mat2 fd = finite_difference_jacobian([&](const Vec2& p) { return radial_map(b, r, L, p); }, x, 1e-5);
    const Mat2 exact = radial_jacobian_matrix(b, r, L, x);
    const RadialJacobian rj = radial_jacobian(b, r, L, x);
    // Eigenvalues of the symmetric FD matrix: trace and determinant.
    CHECK(fd[0] + fd[3] == doctest::Approx(rj.eigenvalue_normal + rj.eigenvalue_tangent).epsilon(1e-6));
    CHECK(std::abs(det(fd)) == doctest::Approx(rj.det).epsilon(1e-6));
    for (int e = 0; e < 4; ++e) CHECK(fd[e] == doctest::Approx(exact[e]).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("jacobian_lower_bound") {
  CHECK(jacobian_lower_bound(1.0, 2.0, 2) == doctest::Approx(1.0 / 24.0));
  // r^2 / (4 (r + L) L) at r = L = 1 is 1/8.
  CHECK(jacobian_lower_bound(1.0, 1.0, 2) == doctest::Approx(1.0 / 8.0));
  CHECK(jacobian_lower_bound(2.0, 4.0, 2) == doctest::Approx(jacobian_lower_bound(1.0, 2.0, 2)));

  // The bound holds for the determinant on the whole annulus r < |x| <= r + L.
  for (double rho = 1.0; rho <= 3.0; rho += 0.01) {
    CHECK(radial_jacobian({0.0, 0.0}, 1.0, 2.0, {rho, 0.0}).det >= 1.0 / 24.0 - 1e-12);
  }
}

TEST_CASE("lp_constant") {
  CHECK(lp_constant(1.0, 2.0, 2, 1.0) == doctest::Approx(1.0));
  CHECK(lp_constant(1.0, 2.0, 2, kInfinity) == doctest::Approx(24.0));
  CHECK(lp_constant(1.0, 2.0, 2, 2.0) == doctest::Approx(std::sqrt(24.0)));
}

TEST_CASE("radial pushforward of f+ = 1 respects 1 / inf J") {
  const double r = 1.0, L = 2.0;
  const Vec2 b{0.0, 0.0};
  const GridSpec src{{1.2, -0.5}, 1.0 / 64.0, 64, 64};
  const Quadrature q = quadrature_of(DensityField(src, 1.0), 2);
  const PointMap map = [&](const Vec2& x) { return radial_map(b, r, L, x); };
  const ScalarMap jac = [&](const Vec2& x) { return radial_jacobian(b, r, L, x).det; };
  const GridSpec target = GridSpec::covering({{-1.0, -1.0}, {1.0, 1.0}}, 1.0 / 64.0);
  const DensityField image = pushforward_by_map(q, map, jac, target, PushforwardMode::kDensity);
  CHECK(lp_norm(image, kInfinity) > 1.0);
  CHECK(lp_norm(image, kInfinity) <= 24.0 * (1.0 + 1e-9));
  CHECK(pushforward_by_map(q, map, jac, target, PushforwardMode::kMass).mass() ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("direct_exterior_map") {
  const Domain sq(kSquare);
  check_point(direct_exterior_map(sq, 0.5, {0.5, 0.2}), {0.5, -0.1});
  check_point(direct_exterior_map(sq, 1e-12, {0.5, 0.2}), {0.5, 0.0}, 1e-9);
  CHECK(default_exterior_c(1.0, 2.0) == doctest::Approx(0.125));

  const SymmetrizationContext ctx{Domain(round_approximate(kSquare, 0.5, 0.25))};
  const double c = default_exterior_c(ctx.radius, ctx.diameter);
  std::vector<Vec2> pts;
  for (const Vec2& x : interior_samples(ctx.domain, 100000, 9)) {
    const BoundaryPoint bp = nearest_boundary(ctx.domain, x);
    if (bp.gap > 1e-4 && bp.distance > 1e-4) pts.push_back(x);
  }
  const DeterminantSweep sweep =
      determinant_sweep([&](const Vec2& x) { return direct_exterior_map(ctx.domain, c, x); }, pts);
  CHECK(sweep.samples == pts.size());
  CHECK(sweep.min_abs_det > 0.0);
}

TEST_CASE("ray identity: [x, T x] meets the boundary once, at the projection") {
  for (const SymmetrizationContext& ctx :
       {SymmetrizationContext{Domain(kSquare)}, SymmetrizationContext{Domain(round_approximate(kSquare, 0.5, 0.25))}}) {
    const PointMap map = symmetrization_map(ctx);
    std::size_t violations = 0;
    for (const Vec2& x : interior_samples(ctx.domain, 100000, 17)) {
      const Vec2 y = map(x);
      const std::vector<double> t = boundary_crossings(ctx.domain, x, y);
      const Vec2 p = nearest_boundary(ctx.domain, x).point;
      if (t.size() != 1 || distance(x + (y - x) * t[0], p) > 1e-9) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("symmetrization potentials are 1-Lipschitz and tight on the rays") {
  const SymmetrizationContext ctx{Domain(round_approximate(kSquare, 0.5, 0.25))};
  const Potential u = symmetrization_potential(ctx);
  CHECK(u.lip <= 1.0);
  const PointMap map = symmetrization_map(ctx);
  for (const Vec2& x : interior_samples(ctx.domain, 1000, 23)) {
    CHECK(u.eval(x) - u.eval(map(x)) == doctest::Approx(distance(x, map(x))).epsilon(1e-12));
  }
}

TEST_CASE("resolve_seams moves seam points off the seam") {
  const SymmetrizationContext ctx{Domain(kSquare)};
  Quadrature q;
  q.points = {{0.25, 0.25}, {0.5, 0.2}};
  q.weights = {1.0, 1.0};
  q.sub_area = 1.0;
  const PreparedSource ps = resolve_seams(ctx, q);
  CHECK(ps.seam_points == 1);
  CHECK(nearest_boundary(ctx.domain, ps.quadrature.points[0]).gap > 1e-9);
  CHECK(ps.quadrature.points[1] == Vec2{0.5, 0.2});
}
