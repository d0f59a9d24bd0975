#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "tdlab/counterexample.hpp"
#include "tdlab/errors.hpp"
#include "tdlab/fields.hpp"
#include "tdlab/geometry.hpp"

using namespace tdlab;

namespace {

// Proper crossing of the open segments [a, b] and [c, d].
bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return d1 * d2 < 0.0 && d3 * d4 < 0.0;
}

}  // namespace

TEST_CASE("w_of_eps and its derivative") {
  CHECK(w_of_eps(0.0) == 0.0);
  CHECK(w_of_eps(1.0) == doctest::Approx(6.0 / 5.0));
  CHECK(w_of_eps(0.5) == doctest::Approx(5.0 / 8.0));
  CHECK_THROWS_AS(w_of_eps(-0.1), DomainError);
  CHECK_THROWS_AS(w_of_eps(1.5), DomainError);
  for (double eps = 0.05; eps < 0.96; eps += 0.05) {
    const double fd = (w_of_eps(eps + 1e-6) - w_of_eps(eps - 1e-6)) / 2e-6;
    CHECK(w_prime(eps) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("ray_of_eps") {
  const auto [a0, b0] = ray_of_eps(0.0);
  CHECK(a0 == Vec2{0.0, 0.0});
  CHECK(b0 == Vec2{2.0, 0.0});
  const auto [a1, b1] = ray_of_eps(1.0);
  CHECK(a1.y == doctest::Approx(1.2));
  CHECK(b1 == Vec2{3.0, 0.0});
  // l_1 passes through the trapeze vertex (1, 4/5).
  CHECK(std::abs(cross(b1 - a1, Vec2{1.0, 0.8} - a1)) <= 1e-15);
  for (double eps : {0.1, 0.4, 0.9}) CHECK(ray_of_eps(eps).first.x == 0.0);
}

TEST_CASE("mass_balance") {
  const MassBalance one = mass_balance(1.0);
  CHECK(one.source == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(one.target == 1.0);
  const MassBalance zero = mass_balance(0.0);
  CHECK(zero.source == 0.0);
  CHECK(zero.target == 0.0);
  CHECK(std::abs(mass_balance(0.3).source - 0.3) <= 1e-12);
}

TEST_CASE("eps_s_of_point") {
  const RayCoordinates end = eps_s_of_point({2.4, 0.0});
  CHECK(end.eps == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(end.s == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  const RayCoordinates start = eps_s_of_point({0.0, w_of_eps(0.4)});
  CHECK(start.eps == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(start.s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(eps_s_of_point({2.0, 0.0}), ApexDegenerate);
  CHECK_THROWS_AS(eps_s_of_point({4.0, 0.0}), DomainError);
  CHECK_THROWS_AS(eps_s_of_point({1.0, 2.0}), DomainError);
}

TEST_CASE("eps_s round trip") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double eps = std::max(1e-6, u(rng)), s = u(rng);
    const RayCoordinates rc = eps_s_of_point(point_of_eps_s(eps, s));
    worst = std::max({worst, std::abs(rc.eps - eps), std::abs(rc.s - s)});
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("counterexample_map") {
  const Vec2 top = counterexample_map({0.0, 1.2});
  CHECK(top.x == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(top.y == 0.0);
  CHECK(counterexample_map({1e-7, 1e-7}).x == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("pushforward of the trapeze is uniform on [2,3]") {
  const MapPlan plan = counterexample_plan(1.0 / 1024.0);
  REQUIRE(plan.size() >= 1000000);
  std::vector<double> bins(100, 0.0);
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const auto b = std::min<std::size_t>(99, static_cast<std::size_t>((plan.dest[k].x - 2.0) * 100.0));
    bins[b] += plan.source.weights[k];
  }
  for (double m : bins) CHECK(m == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("jacobian_J matches finite differences of the ray parametrization") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double step = 1e-6;
  for (int k = 0; k < 10000; ++k) {
    const double eps = 0.01 + 0.98 * u(rng), t = 0.01 + 0.98 * u(rng);
    const Vec2 de = (point_of_eps_s(eps + step, t) - point_of_eps_s(eps - step, t)) / (2.0 * step);
    const Vec2 dt = (point_of_eps_s(eps, t + step) - point_of_eps_s(eps, t - step)) / (2.0 * step);
    CHECK(std::abs(std::abs(cross(de, dt)) - jacobian_J(eps, t)) <= 1e-8);
  }
}

TEST_CASE("analytic sigma scales like 1 / (s + eps)") {
  const SigmaWindow sw = sigma_window(0.2, 50);
  CHECK(sw.c1 > 0.0);
  CHECK(sw.c2 / sw.c1 <= 10.0);
  CHECK_THROWS_AS(analytic_sigma(0.0, 0.5), DomainError);
  CHECK_THROWS_AS(analytic_sigma(0.5, 1.5), DomainError);
}

TEST_CASE("deposited sigma matches the closed form away from the apex") {
  const MapPlan plan = counterexample_plan(1.0 / 512.0);
  const DensityField sigma = counterexample_sigma(plan, 1.0 / 256.0);
  CHECK(analytic_discrepancy(sigma, 0.1) <= 0.05);
}

TEST_CASE("ball_mass") {
  const DensityField one(counterexample_grid(1.0 / 64.0), 1.0);
  for (double rho : {0.01, 0.05, 0.2}) CHECK(ball_mass(one, kApex, rho) == doctest::Approx(M_PI * rho * rho).epsilon(1e-12));
  CHECK_THROWS_AS(ball_mass(one, kApex, 5.0), OutOfGrid);
  CHECK(disk_box_overlap({{0.0, 0.0}, {1.0, 1.0}}, {0.0, 0.0}, 0.5) == doctest::Approx(M_PI * 0.25 / 4.0));
}

TEST_CASE("tangency scale eps_r ~ sqrt(r)") {
  for (double r : {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}) {
    const double eps = tangency_eps(r);
    const auto [a, b] = ray_of_eps(eps);
    // Distance from the apex to the line l_eps equals r.
    CHECK(std::abs(cross(b - a, kApex - a)) / distance(a, b) == doctest::Approx(r).epsilon(1e-9));
    CHECK(eps / std::sqrt(r) >= 0.5);
    CHECK(eps / std::sqrt(r) <= 2.0);
  }
  CHECK_THROWS_AS(tangency_eps(10.0), DomainError);
}

TEST_CASE("distinct rays do not cross") {
  std::vector<std::pair<Vec2, Vec2>> rays;
  for (int k = 1; k <= 40; ++k) rays.push_back(ray_of_eps(k / 40.0));
  for (std::size_t i = 0; i < rays.size(); ++i)
    for (std::size_t j = i + 1; j < rays.size(); ++j)
      CHECK(!segments_cross(rays[i].first, rays[i].second, rays[j].first, rays[j].second));
}

TEST_CASE("lp_threshold_study classification") {
  const GridSpec g{{0.0, 0.0}, 0.25, 4, 4};
  // Constant norms: convergent. Norms growing by 2x per level: divergent.
  const std::vector<DensityField> flat{DensityField(g, 1.0), DensityField(g, 1.0), DensityField(g, 1.0)};
  const std::vector<DensityField> growing{DensityField(g, 1.0), DensityField(g, 2.0), DensityField(g, 4.0)};
  const LpStudy a = lp_threshold_study(flat, {2.0});
  REQUIRE(a.classes.size() == 1);
  CHECK(a.classes[0].verdict == Verdict::kConvergent);
  const LpStudy b = lp_threshold_study(growing, {2.0});
  CHECK(b.classes[0].verdict == Verdict::kDivergent);
  CHECK(b.classes[0].predicted_exponent == doctest::Approx(-0.5));
  CHECK(std::string(to_string(Verdict::kInconclusive)) == "INCONCLUSIVE");
}

TEST_CASE("geometric_radii") {
  const std::vector<double> r = geometric_radii(0.01, 0.1, 10);
  REQUIRE(r.size() == 10);
  CHECK(r.front() == doctest::Approx(0.01));
  CHECK(r.back() == doctest::Approx(0.1));
  CHECK(r[1] / r[0] == doctest::Approx(r[9] / r[8]));
}
