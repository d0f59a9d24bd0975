#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "tdlab/counterexample.hpp"
#include "tdlab/errors.hpp"
#include "tdlab/fields.hpp"
#include "tdlab/geometry.hpp"
#include "tdlab/raydensity.hpp"
#include "tdlab/symmetrize.hpp"

using namespace tdlab;

namespace {

const ConvexPolygon kSquare({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}});
const std::vector<Vec2> kStrip{{0.3, 0.0}, {0.7, 0.0}, {0.7, 0.2}, {0.3, 0.2}};

MapPlan single_segment(const Vec2& a, const Vec2& b, double w = 1.0) {
  MapPlan plan;
  plan.source.points = {a};
  plan.source.weights = {w};
  plan.source.sub_area = 1.0;
  plan.dest = {b};
  return plan;
}

struct Strip {
  SymmetrizationContext ctx{Domain(kSquare)};
  Quadrature q;
  MapPlan projection;
  MapPlan reflection;

  explicit Strip(double d) : q(resolve_seams(ctx, clipped_quadrature(kStrip, 1.0, d)).quadrature) {
    projection = plan_from_map(q, projection_map(ctx.domain));
    reflection = plan_from_map(q, symmetrization_map(ctx));
  }
};

// Cell average of the exact strip density 0.2 - y on Q.
double strip_sigma(const GridSpec& g, std::size_t i, std::size_t j) {
  const Vec2 c = g.cell_center(i, j);
  const double x_lo = std::max(c.x - g.h / 2, 0.3), x_hi = std::min(c.x + g.h / 2, 0.7);
  const double y_lo = std::max(c.y - g.h / 2, 0.0), y_hi = std::min(c.y + g.h / 2, 0.2);
  if (x_hi <= x_lo || y_hi <= y_lo) return 0.0;
  const double integral_y = 0.2 * (y_hi - y_lo) - 0.5 * (y_hi * y_hi - y_lo * y_lo);
  return (x_hi - x_lo) * integral_y / (g.h * g.h);
}

}  // namespace

TEST_CASE("single segment through one cell") {
  const GridSpec one{{0.0, 0.0}, 1.0, 1, 1};
  const DensityField s = deposit_transport_density(single_segment({0.0, 0.5}, {1.0, 0.5}), one);
  CHECK(s.at(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("deposit splits a diagonal segment by exact cell lengths") {
  const GridSpec g{{0.0, 0.0}, 0.5, 2, 2};
  const DensityField s = deposit_transport_density(single_segment({0.0, 0.0}, {1.0, 1.0}), g);
  const double len = std::sqrt(0.5);  // per diagonal cell
  CHECK(s.at(0, 0) == doctest::Approx(len / 0.25));
  CHECK(s.at(1, 1) == doctest::Approx(len / 0.25));
  CHECK(s.at(1, 0) == 0.0);
  CHECK(s.at(0, 1) == 0.0);
}

TEST_CASE("transport_cost") {
  const Quadrature q = clipped_quadrature(kStrip, 1.0, 1.0 / 128.0);
  CHECK(transport_cost(plan_from_map(q, [](const Vec2& x) { return x; })) == 0.0);
  const Strip strip(1.0 / 128.0);
  CHECK(transport_cost(strip.projection) == doctest::Approx(0.008).epsilon(1e-12));
  CHECK(transport_cost(strip.reflection) == doctest::Approx(0.016).epsilon(1e-12));
}

TEST_CASE("strip density matches 0.2 - y") {
  for (double h : {1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0}) {
    const Strip strip(h / 4.0);
    const GridSpec g = GridSpec::covering(strip.ctx.enclosing, h);
    const DensityField s = deposit_transport_density(strip.projection, g);
    double err = 0.0, ref = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j) {
      for (std::size_t i = 0; i < g.nx; ++i) {
        const double exact = strip_sigma(g, i, j);
        err += std::abs(s.at(i, j) - exact);
        ref += exact;
      }
    }
    CHECK(err / ref <= 2.0 * h);

    const DensityField r = deposit_transport_density(strip.reflection, g);
    CHECK(restriction_discrepancy(r, s, strip.ctx.domain) <= 2.0 * h);
  }
}

TEST_CASE("restriction_discrepancy") {
  const Strip strip(1.0 / 512.0);
  const GridSpec g = GridSpec::covering(strip.ctx.enclosing, 1.0 / 128.0);
  const DensityField s = deposit_transport_density(strip.projection, g);
  CHECK(restriction_discrepancy(s, s, strip.ctx.domain) == 0.0);
  CHECK(restriction_discrepancy(deposit_transport_density(strip.reflection, g), s, strip.ctx.domain) <= 0.02);

  const GridSpec other = GridSpec::covering(strip.ctx.enclosing, 1.0 / 64.0);
  CHECK_THROWS_AS(restriction_discrepancy(deposit_transport_density(strip.projection, other), s, strip.ctx.domain),
                  GridMismatch);
}

TEST_CASE("duality gaps of the closed-form potentials") {
  const Strip strip(1.0 / 256.0);
  const double reflection_gap = duality_gap(strip.reflection, symmetrization_potential(strip.ctx));
  CHECK(std::abs(reflection_gap) <= 1e-12 * transport_cost(strip.reflection));

  const SymmetrizationContext round{Domain(round_approximate(kSquare, 0.5, 0.25))};
  const Quadrature q = resolve_seams(round, clipped_quadrature(kSquare.vertices(), 1.0, 1.0 / 128.0)).quadrature;
  const MapPlan radial = plan_from_map(q, symmetrization_map(round));
  CHECK(std::abs(duality_gap(radial, symmetrization_potential(round))) <= 1e-12 * transport_cost(radial));

  const Potential zero{[](const Vec2&) { return 0.0; }, 0.0};
  CHECK(duality_gap(strip.projection, zero) == doctest::Approx(transport_cost(strip.projection)));
}

TEST_CASE("duality_gap rejects potentials that are not 1-Lipschitz") {
  const Strip strip(1.0 / 64.0);
  const Potential claimed{[](const Vec2&) { return 0.0; }, 1.5};
  CHECK_THROWS_AS(duality_gap(strip.projection, claimed), NotLip1);
  const Potential steep{[](const Vec2& x) { return 2.0 * x.y; }, 1.0};
  CHECK_THROWS_AS(duality_gap(strip.projection, steep), NotLip1);
  CHECK(check_lipschitz(steep, strip.projection).max_ratio == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("deposited mass equals the transport cost") {
  const MapPlan plan = counterexample_plan(1.0 / 64.0);
  const DensityField s = counterexample_sigma(plan, 1.0 / 64.0);
  CHECK(s.mass() == doctest::Approx(transport_cost(plan)).epsilon(1e-12));
}

TEST_CASE("translation equivariance") {
  const Strip strip(1.0 / 128.0);
  const GridSpec g{{-1.0, -1.0}, 1.0 / 32.0, 128, 128};
  const Vec2 shift{0.25, 0.5};  // a whole number of cells
  MapPlan moved = strip.projection;
  for (Vec2& p : moved.source.points) p += shift;
  for (Vec2& p : moved.dest) p += shift;
  const DensityField a = deposit_transport_density(strip.projection, g);
  const DensityField b = deposit_transport_density(moved, g);
  for (std::size_t j = 0; j + 16 < g.ny; ++j) {
    for (std::size_t i = 0; i + 8 < g.nx; ++i) CHECK(b.at(i + 8, j + 16) == doctest::Approx(a.at(i, j)));
  }
}

TEST_CASE("parallel deposition agrees with the serial one") {
  const MapPlan plan = counterexample_plan(1.0 / 128.0);
  const DensityField serial = counterexample_sigma(plan, 1.0 / 128.0, {true, 0});
  const DensityField parallel = counterexample_sigma(plan, 1.0 / 128.0, {false, 4});
  REQUIRE(serial.values.size() == parallel.values.size());
  for (std::size_t k = 0; k < serial.values.size(); ++k) {
    CHECK(parallel.values[k] == doctest::Approx(serial.values[k]).epsilon(1e-12).scale(1e-12));
  }
}

TEST_CASE("errors carry the failing index") {
  const GridSpec g{{0.0, 0.0}, 0.25, 4, 4};
  MapPlan plan = single_segment({0.5, 0.5}, {0.6, 0.6});
  plan.source.points.push_back({0.5, 0.5});
  plan.source.weights.push_back(1.0);
  plan.dest.push_back({2.0, 0.5});
  try {
    deposit_transport_density(plan, g);
    FAIL("expected OutOfGrid");
  } catch (const OutOfGrid& e) {
    CHECK(e.index == 1);
  }

  Quadrature q;
  q.points = {{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}};
  q.weights = {1.0, 1.0, 1.0};
  q.sub_area = 1.0;
  try {
    plan_from_map(q, [](const Vec2& x) {
      if (x.x > 0.25) throw std::runtime_error("boom");
      return x;
    });
    FAIL("expected MapError");
  } catch (const MapError& e) {
    CHECK(e.index == 2);
  }
}

TEST_CASE("segment_integral") {
  const Strip strip(1.0 / 128.0);
  const ScalarMap one = [](const Vec2&) { return 1.0; };
  CHECK(segment_integral(strip.projection, one) == doctest::Approx(0.008));
  // Restricted to the square, the reflected rays carry exactly the projection's length.
  CHECK(segment_integral(strip.reflection, one, &strip.ctx.domain) == doctest::Approx(0.008).epsilon(1e-12));
  const ScalarMap phi = [](const Vec2& x) { return std::cos(x.x) * (1.0 + x.y); };
  CHECK(segment_integral(strip.reflection, phi, &strip.ctx.domain) ==
        doctest::Approx(segment_integral(strip.projection, phi)).epsilon(1e-12));
}
