#include <cmath>
#include <filesystem>
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

const std::vector<Vec2> kSquare{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
const std::vector<Vec2> kStrip{{0.3, 0.0}, {0.7, 0.0}, {0.7, 0.2}, {0.3, 0.2}};

GridSpec unit_grid(std::size_t n) { return {{0.0, 0.0}, 1.0 / static_cast<double>(n), n, n}; }

}  // namespace

TEST_CASE("quadrature_of") {
  const DensityField one(unit_grid(4), 1.0);
  const Quadrature q1 = quadrature_of(one, 1);
  REQUIRE(q1.size() == 16);
  for (double w : q1.weights) CHECK(w == doctest::Approx(1.0 / 16.0));

  const Quadrature q2 = quadrature_of(one, 2);
  CHECK(q2.size() == 64);
  CHECK(q2.mass() == doctest::Approx(1.0).epsilon(1e-14));

  const GridSpec g = GridSpec::covering({{0.0, 0.0}, {1.0, 1.2}}, 1.0 / 256.0);
  const DensityField trapeze = rasterize_polygon(g, trapeze_vertices(), 1.0);
  CHECK(std::abs(quadrature_of(trapeze, 2).mass() - 1.0) <= 2.0 * g.h);
}

TEST_CASE("clipped_quadrature keeps the exact mass inside the polygon") {
  const Quadrature q = clipped_quadrature(trapeze_vertices(), 1.0, 1.0 / 64.0);
  CHECK(q.mass() == doctest::Approx(1.0).epsilon(1e-13));
  const ConvexPolygon a(trapeze_vertices());
  for (const Vec2& p : q.points) CHECK(a.contains(p));
}

TEST_CASE("lp_norm") {
  const DensityField two(unit_grid(8), 2.0);
  for (double p : {1.0, 2.0, 3.5, kInfinity}) CHECK(lp_norm(two, p) == doctest::Approx(2.0));

  const DensityField half = rasterize_polygon(unit_grid(8), {{0.0, 0.0}, {0.5, 0.0}, {0.5, 1.0}, {0.0, 1.0}});
  CHECK(lp_norm(half, 2.0) == doctest::Approx(std::sqrt(0.5)));

  // Strip scenario: sigma(x, y) = 0.2 - y peaks at 0.2 on the bottom face.
  const double h = 1.0 / 64.0;
  const Domain sq{ConvexPolygon(kSquare)};
  const MapPlan plan = plan_from_map(clipped_quadrature(kStrip, 1.0, h / 4.0), projection_map(sq));
  const DensityField sigma = deposit_transport_density(plan, unit_grid(64));
  CHECK(std::abs(lp_norm(sigma, kInfinity) - 0.2) <= h);
}

TEST_CASE("pushforward by a translation keeps the density") {
  const DensityField f = rasterize_polygon(unit_grid(16), {{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75}});
  const Quadrature q = quadrature_of(f, 2);
  const GridSpec target{{0.0, 0.0}, 1.0 / 16.0, 32, 32};
  const Vec2 shift{0.5, 0.25};
  for (PushforwardMode mode : {PushforwardMode::kDensity, PushforwardMode::kMass}) {
    const DensityField g = pushforward_by_map(
        q, [&](const Vec2& x) { return x + shift; }, [](const Vec2&) { return 1.0; }, target, mode);
    CHECK(g.mass() == doctest::Approx(f.mass()).epsilon(1e-12));
    for (std::size_t j = 0; j < 16; ++j) {
      for (std::size_t i = 0; i < 16; ++i) CHECK(g.at(i + 8, j + 4) == doctest::Approx(f.at(i, j)));
    }
  }
}

TEST_CASE("pushforward by a reflection is an isometry") {
  const SymmetrizationContext ctx{Domain(ConvexPolygon(kSquare))};
  const DensityField f = rasterize_polygon(unit_grid(16), {{0.25, 0.0}, {0.75, 0.0}, {0.75, 0.25}, {0.25, 0.25}});
  const GridSpec target = GridSpec::covering({{-1.0, -1.0}, {2.0, 2.0}}, 1.0 / 16.0);
  const DensityField g = pushforward_by_map(
      quadrature_of(f, 2), [&](const Vec2& x) { return reflect_map(ctx, x); }, [](const Vec2&) { return 1.0; },
      target, PushforwardMode::kMass);
  CHECK(g.mass() == doctest::Approx(f.mass()));
  CHECK(lp_norm(g, kInfinity) == doctest::Approx(1.0));
  const DensityField reflected =
      rasterize_polygon(target, {{0.25, -0.25}, {0.75, -0.25}, {0.75, 0.0}, {0.25, 0.0}});
  for (std::size_t k = 0; k < g.values.size(); ++k) CHECK(g.values[k] == doctest::Approx(reflected.values[k]));
}

TEST_CASE("pushforward rejects out-of-grid images and singular Jacobians") {
  const Quadrature q = quadrature_of(DensityField(unit_grid(4), 1.0), 1);
  const auto id = [](const Vec2& x) { return x; };
  CHECK_THROWS_AS(pushforward_by_map(
                      q, [](const Vec2& x) { return x + Vec2{5.0, 0.0}; }, [](const Vec2&) { return 1.0; },
                      unit_grid(4), PushforwardMode::kMass),
                  OutOfGrid);
  CHECK_THROWS_AS(pushforward_by_map(q, id, [](const Vec2&) { return 0.0; }, unit_grid(4), PushforwardMode::kDensity),
                  SingularJacobian);
}

TEST_CASE("boundary_pushforward of the strip") {
  const Domain sq{ConvexPolygon(kSquare)};
  const BoundaryMeasure m = boundary_pushforward(clipped_quadrature(kStrip, 1.0, 1.0 / 200.0), sq, 0.05);
  CHECK(m.total_mass() == doctest::Approx(0.08));
  const BoundaryMeasure::Face& bottom = m.faces[0];
  for (std::size_t b = 0; b < bottom.mass.size(); ++b) {
    const double s = (static_cast<double>(b) + 0.5) * bottom.bin_width;
    const double expected = (s > 0.3 && s < 0.7) ? 0.2 : 0.0;
    CHECK(m.density(0, b) == doctest::Approx(expected).epsilon(1e-9));
  }
  for (std::size_t f = 1; f < 4; ++f) {
    for (double v : m.faces[f].mass) CHECK(v == 0.0);
  }
}

TEST_CASE("boundary_pushforward sends a centered point mass to the lowest index") {
  const Domain sq{ConvexPolygon(kSquare)};
  Quadrature q;
  q.points = {{0.5, 0.5}};
  q.weights = {1.0};
  q.sub_area = 1.0;
  const BoundaryMeasure m = boundary_pushforward(q, sq, 0.1);
  CHECK(m.ties == 1);
  double face0 = 0.0;
  for (double v : m.faces[0].mass) face0 += v;
  CHECK(face0 == doctest::Approx(1.0));
}

TEST_CASE("boundary_pushforward on a round approximation of a disk is nearly uniform") {
  // Disks of radius 0.5 on a circle of radius 1.5 enclose a near-disk.
  std::vector<Vec2> centers;
  const std::size_t n = 96;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = 2.0 * M_PI * static_cast<double>(k) / n;
    centers.push_back({1.5 * std::cos(a), 1.5 * std::sin(a)});
  }
  const Domain d{RoundPolygon(centers, 0.5)};
  const BoundaryMeasure m = boundary_pushforward(domain_quadrature(d, 1.0, 1.0 / 256.0), d, 1.0);
  // Coarse binning: the mass of each block of 12 consecutive faces.
  const double total = m.total_mass();
  const std::size_t blocks = 8;
  double chi2 = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    double mass = 0.0;
    for (std::size_t f = 0; f < m.faces.size(); ++f) {
      if (f * blocks / m.faces.size() != b) continue;
      for (double v : m.faces[f].mass) mass += v;
    }
    const double expected = total / blocks;
    chi2 += (mass - expected) * (mass - expected) / expected;
  }
  CHECK(chi2 / total <= 1e-3);
}

TEST_CASE("density CSV round trip") {
  DensityField f(GridSpec{{-0.5, 0.25}, 0.125, 5, 3}, 0.0);
  for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] = 0.1 * static_cast<double>(k) + 1.0 / 3.0;
  const auto dir = std::filesystem::temp_directory_path() / "tdlab_fields_test";
  std::filesystem::create_directories(dir);
  write_density_csv(f, (dir / "f.csv").string(), (dir / "f.json").string());
  const DensityField g = read_density_csv((dir / "f.csv").string(), (dir / "f.json").string());
  CHECK(g.grid == f.grid);
  CHECK(g.values == f.values);
  std::filesystem::remove_all(dir);
}
