#include "tdlab/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "tdlab/errors.hpp"
#include "tdlab/geometry.hpp"

namespace tdlab {

namespace {

void require_eps(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("eps must lie in [0,1], got " + std::to_string(eps));
}

double ray_length(double eps) { return std::hypot(2.0 + eps, w_of_eps(eps)); }

}  // namespace

std::vector<Vec2> trapeze_vertices() { return {{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.8}, {0.0, 1.2}}; }

std::vector<Vec2> delta_triangle(double eps) {
  require_eps(eps);
  return {{0.0, 0.0}, {2.0 + eps, 0.0}, {0.0, w_of_eps(eps)}};
}

double w_of_eps(double eps) {
  require_eps(eps);
  return 2.0 * eps * (2.0 + eps) / (3.0 + 2.0 * eps);
}

double w_prime(double eps) {
  require_eps(eps);
  const double d = 3.0 + 2.0 * eps;
  return (12.0 + 12.0 * eps + 4.0 * eps * eps) / (d * d);
}

std::pair<Vec2, Vec2> ray_of_eps(double eps) { return {{0.0, w_of_eps(eps)}, {2.0 + eps, 0.0}}; }

Vec2 point_of_eps_s(double eps, double s) { return {(1.0 - s) * (2.0 + eps), s * w_of_eps(eps)}; }

MassBalance mass_balance(double eps) {
  MassBalance mb;
  mb.target = eps;  // length of [2, 2+eps] under unit linear density
  if (eps > 0.0) mb.source = polygon_area(clip_convex(trapeze_vertices(), delta_triangle(eps)));
  return mb;
}

RayCoordinates eps_s_of_point(const Vec2& x) {
  if (distance(x, kApex) <= 1e-12) throw ApexDegenerate("point coincides with the apex (2,0)");
  if (x.x < -1e-12 || x.y < -1e-12) throw DomainError("point lies outside Delta_1");
  RayCoordinates rc;
  if (x.y <= 0.0) {
    // On the axis: the target segment (s = 0) or the degenerate ray eps = 0.
    if (x.x >= 2.0) {
      rc.eps = x.x - 2.0;
      require_eps(rc.eps);
    } else {
      rc.s = 1.0 - x.x / 2.0;
    }
    return rc;
  }
  auto F = [&](double e) { return x.x / (2.0 + e) + x.y / w_of_eps(e) - 1.0; };
  auto dF = [&](double e) {
    const double w = w_of_eps(e);
    return -x.x / ((2.0 + e) * (2.0 + e)) - x.y * w_prime(e) / (w * w);
  };
  if (F(1.0) > 1e-12) throw DomainError("point lies outside Delta_1");

  // F(0+) = +inf and F is decreasing: keep a sign-changing bracket and fall
  // back to bisection whenever Newton leaves it.
  double lo = 0.0;
  double hi = 1.0;
  double e = 0.5;
  constexpr std::size_t kMaxIter = 200;
  for (std::size_t it = 1; it <= kMaxIter; ++it) {
    const double f = F(e);
    rc.iterations = it;
    if (f > 0.0) lo = e; else hi = e;
    if (std::abs(f) <= 1e-15 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    double next = e - f / dF(e);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    e = next;
    if (it == kMaxIter) throw NoConvergence("eps(x) inversion did not converge", e);
  }
  rc.eps = std::clamp(e, 0.0, 1.0);
  rc.s = std::clamp(x.y / w_of_eps(rc.eps), 0.0, 1.0);
  return rc;
}

Vec2 counterexample_map(const Vec2& x) { return {2.0 + eps_s_of_point(x).eps, 0.0}; }

double jacobian_J(double eps, double t) {
  return (1.0 - t) * w_of_eps(eps) + t * (2.0 + eps) * w_prime(eps);
}

double analytic_sigma(double eps, double s) {
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("analytic sigma needs eps in (0,1]");
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("analytic sigma needs s in [0,1]");
  // f+ = 1 on the ray exactly where x1 <= 1, i.e. t >= 1 - 1/(2+eps).
  const double lo = std::max(s, 1.0 - 1.0 / (2.0 + eps));
  const double upstream = (1.0 - lo) * 0.5 * (jacobian_J(eps, lo) + jacobian_J(eps, 1.0));  // J is affine in t
  return ray_length(eps) * upstream / jacobian_J(eps, s);
}

SigmaWindow sigma_window(double eps0, std::size_t n) {
  SigmaWindow sw;
  sw.c1 = kInfinity;
  for (std::size_t i = 1; i <= n; ++i) {
    const double eps = eps0 * static_cast<double>(i) / static_cast<double>(n);
    for (std::size_t j = 1; j <= n; ++j) {
      const double s = eps0 * static_cast<double>(j) / static_cast<double>(n);
      const double v = analytic_sigma(eps, s) * (s + eps);
      sw.c1 = std::min(sw.c1, v);
      sw.c2 = std::max(sw.c2, v);
      ++sw.samples;
    }
  }
  return sw;
}

GridSpec counterexample_grid(double h) {
  return GridSpec::covering(Box{{-0.25, -0.25}, {3.25, 1.45}}, h);
}

MapPlan counterexample_plan(double source_h, std::size_t subdivision) {
  if (!(source_h > 0.0) || subdivision == 0) throw std::invalid_argument("source_h > 0 and subdivision >= 1 required");
  // Each sub-cell of A carries its exact clipped area inside A, so the
  // total mass is area(A) = 1.
  const Quadrature q = clipped_quadrature(trapeze_vertices(), 1.0, source_h / static_cast<double>(subdivision));
  return plan_from_map(q, counterexample_map);
}

DensityField counterexample_sigma(const MapPlan& plan, double h, const ExecutionOptions& opts) {
  return deposit_transport_density(plan, counterexample_grid(h), opts);
}

namespace {

// Antiderivative of sqrt(R^2 - x^2) on [-R, R].
double chord_primitive(double x, double R) {
  x = std::clamp(x, -R, R);
  return 0.5 * (x * std::sqrt(std::max(0.0, R * R - x * x)) + R * R * std::asin(x / R));
}

}  // namespace

double disk_box_overlap(const Box& box, const Vec2& center, double radius) {
  const double R = radius;
  // Shift so the disk is centered at the origin.
  const double x0 = std::max(box.lo.x - center.x, -R);
  const double x1 = std::min(box.hi.x - center.x, R);
  const double y0 = box.lo.y - center.y;
  const double y1 = box.hi.y - center.y;
  if (x0 >= x1 || y0 >= y1) return 0.0;
  // The vertical extent at abscissa x is [max(y0, -g), min(y1, g)] with
  // g = sqrt(R^2 - x^2); break where g crosses |y0| or |y1|.
  std::vector<double> br{x0, x1};
  for (double y : {y0, y1}) {
    if (std::abs(y) < R) {
      const double xb = std::sqrt(R * R - y * y);
      for (double c : {-xb, xb})
        if (c > x0 && c < x1) br.push_back(c);
    }
  }
  std::sort(br.begin(), br.end());
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    const double a = br[k];
    const double b = br[k + 1];
    if (b <= a) continue;
    const double xm = 0.5 * (a + b);
    const double g = std::sqrt(std::max(0.0, R * R - xm * xm));
    const double G = chord_primitive(b, R) - chord_primitive(a, R);  // integral of g
    const bool top_is_arc = g < y1;
    const bool bottom_is_arc = -g > y0;
    if (std::min(y1, g) <= std::max(y0, -g)) continue;
    double top = top_is_arc ? G : y1 * (b - a);
    double bottom = bottom_is_arc ? -G : y0 * (b - a);
    area += top - bottom;
  }
  return area;
}

double ball_mass(const DensityField& sigma, const Vec2& center, double radius) {
  const GridSpec& g = sigma.grid;
  const Box b = g.bounds();
  if (center.x - radius < b.lo.x || center.x + radius > b.hi.x || center.y - radius < b.lo.y ||
      center.y + radius > b.hi.y)
    throw OutOfGrid(0, "ball");
  auto lo_index = [&](double v, double o) { return static_cast<std::size_t>(std::max(0.0, std::floor((v - o) / g.h))); };
  const std::size_t i0 = lo_index(center.x - radius, g.origin.x);
  const std::size_t j0 = lo_index(center.y - radius, g.origin.y);
  const std::size_t i1 = std::min(g.nx - 1, lo_index(center.x + radius, g.origin.x));
  const std::size_t j1 = std::min(g.ny - 1, lo_index(center.y + radius, g.origin.y));
  double mass = 0.0;
  for (std::size_t j = j0; j <= j1; ++j) {
    for (std::size_t i = i0; i <= i1; ++i) {
      const double v = sigma.at(i, j);
      if (v == 0.0) continue;
      const Vec2 lo = g.origin + Vec2{static_cast<double>(i) * g.h, static_cast<double>(j) * g.h};
      mass += v * disk_box_overlap(Box{lo, lo + Vec2{g.h, g.h}}, center, radius);
    }
  }
  return mass;
}

std::vector<double> geometric_radii(double r_lo, double r_hi, std::size_t n) {
  std::vector<double> r(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
    r[k] = r_lo * std::pow(r_hi / r_lo, t);
  }
  return r;
}

BallScaling ball_scaling(const DensityField& sigma, const std::vector<double>& r_list) {
  BallScaling bs;
  bs.r = r_list;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (double r : r_list) {
    const double m = ball_mass(sigma, kApex, 2.0 * r);
    bs.mass.push_back(m);
    const double x = std::log(r);
    const double y = std::log(m);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(r_list.size());
  bs.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  bs.C = std::exp((sy - bs.slope * sx) / n);
  return bs;
}

double tangency_eps(double r) {
  auto dist = [](double e) {
    const double w = w_of_eps(e);
    return e * w / std::hypot(w, 2.0 + e);
  };
  if (!(r > 0.0) || r > dist(1.0)) throw DomainError("no tangent ray for r = " + std::to_string(r));
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve([&](double e) { return dist(e) - r; }, 0.0, 1.0,
                                                        boost::math::tools::eps_tolerance<double>(52), max_iter);
  return 0.5 * (a + b);
}

namespace {

// Adaptive Gauss-Kronrod on [a, b] with panels graded geometrically away
// from a, where the integrands below concentrate.
template <class F>
double integrate_graded(F f, double a, double b, double scale) {
  using boost::math::quadrature::gauss_kronrod;
  if (b <= a) return 0.0;
  double total = 0.0;
  double lo = a;
  double width = std::max(scale, 1e-12);
  while (lo < b) {
    const double hi = std::min(b, lo + width);
    total += gauss_kronrod<double, 15>::integrate(f, lo, hi, 8, 1e-10);
    lo = hi;
    width *= 2.0;
  }
  return total;
}

}  // namespace

double analytic_lp_power(double p, double cutoff) {
  cutoff = std::max(cutoff, 0.0);
  auto inner = [&](double eps) {
    if (eps <= 0.0) return 0.0;
    auto g = [&](double s) {
      const double sig = analytic_sigma(eps, s);
      return std::pow(sig, p) * jacobian_J(eps, s);
    };
    const double lo = std::clamp(cutoff - eps, 0.0, 1.0);
    const double kink = 1.0 - 1.0 / (2.0 + eps);  // f+ switches on here
    double v = 0.0;
    if (lo < kink) {
      v += integrate_graded(g, lo, kink, std::max(lo + eps, 1e-9) * 0.25);
      v += integrate_graded(g, kink, 1.0, 1.0);
    } else {
      v += integrate_graded(g, lo, 1.0, 1.0);
    }
    return v;
  };
  return integrate_graded(inner, 0.0, 1.0, std::max(cutoff, 1e-9) * 0.25);
}

namespace {

bool in_delta1(const Vec2& p) { return p.x >= 0.0 && p.y >= 0.0 && p.x / 3.0 + p.y / 1.2 <= 1.0; }

}  // namespace

double analytic_discrepancy(const DensityField& sigma, double min_sum) {
  const GridSpec& g = sigma.grid;
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const Vec2 lo = g.origin + Vec2{static_cast<double>(i) * g.h, static_cast<double>(j) * g.h};
      if (!in_delta1(lo) || !in_delta1(lo + Vec2{g.h, 0.0}) || !in_delta1(lo + Vec2{0.0, g.h}) ||
          !in_delta1(lo + Vec2{g.h, g.h}))
        continue;
      const Vec2 c = g.cell_center(i, j);
      const RayCoordinates rc = eps_s_of_point(c);
      if (rc.s + rc.eps < min_sum || rc.eps <= 0.0) continue;
      const double a = analytic_sigma(rc.eps, rc.s);
      diff += std::abs(sigma.at(i, j) - a);
      ref += a;
    }
  }
  return ref > 0.0 ? diff / ref : 0.0;
}

double max_near_apex(const DensityField& sigma, double rho) {
  const GridSpec& g = sigma.grid;
  double m = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      if (distance(g.cell_center(i, j), kApex) <= rho) m = std::max(m, sigma.at(i, j));
  return m;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kConvergent: return "CONVERGENT";
    case Verdict::kDivergent: return "DIVERGENT";
    case Verdict::kInconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

LpStudy lp_threshold_study(const std::vector<DensityField>& sigma_by_h, const std::vector<double>& p_list) {
  LpStudy study;
  std::vector<std::vector<double>> powers(p_list.size());
  for (const DensityField& sigma : sigma_by_h) {
    const double h = sigma.grid.h;
    for (std::size_t k = 0; k < p_list.size(); ++k) {
      const double p = p_list[k];
      LpStudyRow row;
      row.p = p;
      row.h = h;
      row.norm = lp_norm(sigma, p);
      row.power = std::pow(row.norm, p);
      row.analytic_power = analytic_lp_power(p, std::sqrt(h));
      powers[k].push_back(row.power);
      study.rows.push_back(row);
    }
  }
  for (std::size_t k = 0; k < p_list.size(); ++k) {
    LpClassification c;
    c.p = p_list[k];
    c.predicted_exponent = 0.5 * (c.p - 3.0);
    const auto& v = powers[k];
    bool all_grow = v.size() >= 2;
    for (std::size_t i = 1; i < v.size(); ++i) {
      const double rel = (v[i] - v[i - 1]) / v[i - 1];
      c.relative_changes.push_back(rel);
      if (rel < 0.15) all_grow = false;
    }
    if (v.size() >= 2) c.raw_exponent = std::log2(v.back() / v[v.size() - 2]);
    if (v.size() >= 3) {
      const double d1 = v[v.size() - 2] - v[v.size() - 3];
      const double d2 = v.back() - v[v.size() - 2];
      c.growth_exponent = (d1 > 0.0 && d2 > 0.0) ? std::log2(d2 / d1) : -kInfinity;
    }
    if (!c.relative_changes.empty() && std::abs(c.relative_changes.back()) <= 0.05)
      c.verdict = Verdict::kConvergent;
    else if (all_grow)
      c.verdict = Verdict::kDivergent;
    study.classes.push_back(c);
  }
  return study;
}

}  // namespace tdlab
