#include "tdlab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "tdlab/errors.hpp"

namespace tdlab {

namespace {

std::vector<Vec2> box_polygon(const Box& b) { return {b.lo, {b.hi.x, b.lo.y}, b.hi, {b.lo.x, b.hi.y}}; }

double l2_relative(const std::vector<double>& a, const std::vector<double>& ref) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    num += (a[k] - ref[k]) * (a[k] - ref[k]);
    den += ref[k] * ref[k];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// Zero outside `domain` (cell centers).
DensityField restrict_to(DensityField field, const Domain& domain) {
  const GridSpec& g = field.grid;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      if (!domain.contains(g.cell_center(i, j))) field.at(i, j) = 0.0;
  return field;
}

}  // namespace

Quadrature source_quadrature(const Domain& domain, const SourceSpec& source, double d) {
  if (source.polygon.empty()) {
    if (domain.is_polygon()) return clipped_quadrature(domain.polygon().vertices(), source.value, d);
    return domain_quadrature(domain, source.value, d);
  }
  Quadrature q = clipped_quadrature(source.polygon, source.value, d);
  for (std::size_t k = 0; k < q.size(); ++k)
    if (!domain.contains(q.points[k]))
      throw InvalidDomain("source polygon leaves the domain at quadrature point " + std::to_string(k));
  return q;
}

ConvexPolygon unit_square() { return ConvexPolygon({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}); }

std::vector<Vec2> strip_polygon() { return {{0.3, 0.0}, {0.7, 0.0}, {0.7, 0.2}, {0.3, 0.2}}; }

GridSpec aligned_grid(const Box& box, double h) { return GridSpec::covering(box, h); }

GridSpec offset_grid(const Box& box, double h) {
  GridSpec g = GridSpec::covering(box, h);
  g.origin = g.origin - Vec2{0.5 * h, 0.5 * h};
  ++g.nx;
  ++g.ny;
  return g;
}

// ---------------------------------------------------------------- project

ProjectStudy project_study(const Domain& domain, const Quadrature& q, double bin_width) {
  ProjectStudy out;
  out.points = q.size();
  out.source_mass = q.mass();
  out.measure = boundary_pushforward(q, domain, bin_width);
  out.boundary_mass = out.measure.total_mass();
  out.max_density = out.measure.max_density();
  out.ties = out.measure.ties;
  out.cost = transport_cost(plan_from_map(q, projection_map(domain)));
  return out;
}

// ---------------------------------------------------------------- symmetrize

CertificateStudy certificate_study(const SymmetrizationContext& ctx, const Quadrature& q) {
  CertificateStudy out;
  out.map = ctx.domain.is_polygon() ? "reflection" : "radial";
  const PreparedSource ps = resolve_seams(ctx, q);
  out.points = ps.quadrature.size();
  out.seam_points = ps.seam_points;
  const MapPlan plan = plan_from_map(ps.quadrature, symmetrization_map(ctx));
  const Potential u = symmetrization_potential(ctx);
  out.cost = transport_cost(plan);
  out.gap = duality_gap(plan, u);
  out.relative_gap = out.cost > 0.0 ? std::abs(out.gap) / out.cost : std::abs(out.gap);
  const LipschitzCheck chk = check_lipschitz(u, plan);
  out.lipschitz_ratio = chk.max_ratio;
  out.lipschitz_pairs = chk.pairs;

  // Each ray must leave the domain once, through the projection point.
  const std::size_t stride = std::max<std::size_t>(1, plan.size() / 20000);
  for (std::size_t k = 0; k < plan.size(); k += stride) {
    const Vec2 x = plan.source.points[k];
    const Vec2 y = plan.dest[k];
    std::size_t crossings = 0;
    Vec2 hit = y;
    for (double t : boundary_crossings(ctx.domain, x, y)) {
      if (t <= 1e-12) continue;
      if (crossings == 0) hit = x + (y - x) * t;
      ++crossings;
    }
    const double err = distance(hit, nearest_boundary(ctx.domain, x).point);
    out.max_ray_error = std::max(out.max_ray_error, err);
    if (crossings != 1 || err > 1e-9) ++out.ray_violations;
    ++out.ray_checked;
  }
  return out;
}

JacobianStudy jacobian_study(double r, double L, std::size_t samples, std::uint64_t seed, double h,
                             const std::vector<double>& p_list) {
  JacobianStudy out;
  out.r = r;
  out.L = L;
  out.samples = samples;
  out.det_bound = jacobian_lower_bound(r, L, 2);
  out.density_bound = 1.0 / out.det_bound;
  out.min_det = kInfinity;
  const Vec2 b{0.0, 0.0};
  const PointMap map = [&](const Vec2& x) { return radial_map(b, r, L, x); };
  const ScalarMap jac = [&](const Vec2& x) { return radial_jacobian(b, r, L, x).det; };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t s = 0; s < samples; ++s) {
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    const double rho = r + L * (1.0 - unit(rng));  // (r, r + L]
    const Vec2 x{rho * std::cos(angle), rho * std::sin(angle)};
    const double d = jac(x);
    out.min_det = std::min(out.min_det, d);
    const double fd = std::abs(det(finite_difference_jacobian(map, x, 1e-5 * std::max(1.0, rho))));
    out.max_fd_relative_error = std::max(out.max_fd_relative_error, std::abs(fd - d) / d);
  }

  const Box src{{r + 0.1 * L, -0.25 * L}, {r + 0.6 * L, 0.25 * L}};
  const Quadrature q = clipped_quadrature(box_polygon(src), 1.0, 0.25 * h);
  const GridSpec target = aligned_grid(Box{{-r, -r}, {r, r}}, h);
  const DensityField fminus = pushforward_by_map(q, map, jac, target, PushforwardMode::kDensity);
  out.max_pushforward_density = lp_norm(fminus, kInfinity);
  for (double p : p_list) {
    JacobianStudy::LpRow row;
    row.p = p;
    const double source_norm = std::isinf(p) ? 1.0 : std::pow(q.mass(), 1.0 / p);
    row.ratio = pushforward_lp_norm(q, jac, p) / source_norm;
    row.constant = lp_constant(r, L, 2, p);
    out.lp.push_back(row);
  }
  return out;
}

DirectMapStudy direct_map_study(const SymmetrizationContext& ctx, std::size_t samples, std::uint64_t seed) {
  DirectMapStudy out;
  out.c = default_exterior_c(ctx.radius, ctx.diameter);
  const double step = 1e-6;
  std::mt19937_64 rng(seed);
  const Box& b = ctx.domain.bounds();
  std::uniform_real_distribution<double> ux(b.lo.x, b.hi.x);
  std::uniform_real_distribution<double> uy(b.lo.y, b.hi.y);
  std::vector<Vec2> points;
  // Keep points whose nearest face is unambiguous at the finite-difference
  // scale; the map is only piecewise smooth across seams.
  for (std::size_t attempt = 0; points.size() < samples && attempt < 50 * samples; ++attempt) {
    const Vec2 x{ux(rng), uy(rng)};
    if (!ctx.domain.contains(x)) continue;
    const BoundaryPoint bp = nearest_boundary(ctx.domain, x);
    if (bp.gap <= 100.0 * step || bp.distance <= 100.0 * step) continue;
    points.push_back(x);
  }
  const double c = out.c;
  out.sweep = determinant_sweep([&](const Vec2& x) { return direct_exterior_map(ctx.domain, c, x); }, points, step);
  return out;
}

// ---------------------------------------------------------------- density

RestrictionStudy restriction_study(const SymmetrizationContext& ctx, const Quadrature& q,
                                   const std::vector<double>& h_list, const ExecutionOptions& opts) {
  RestrictionStudy out;
  const PreparedSource ps = resolve_seams(ctx, q);
  out.points = ps.quadrature.size();
  const MapPlan full = plan_from_map(ps.quadrature, symmetrization_map(ctx));
  const MapPlan proj = plan_from_map(ps.quadrature, projection_map(ctx.domain));
  out.projection_cost = transport_cost(proj);
  out.symmetric_cost = transport_cost(full);
  for (double h : h_list) {
    for (bool offset : {false, true}) {
      const GridSpec g = offset ? offset_grid(ctx.enclosing, h) : aligned_grid(ctx.enclosing, h);
      const DensityField s_full = deposit_transport_density(full, g, opts);
      DensityField s_proj = deposit_transport_density(proj, g, opts);
      out.rows.push_back({h, offset, restriction_discrepancy(s_full, s_proj, ctx.domain)});
      if (out.sigma.values.empty() && !offset) out.sigma = std::move(s_proj);
    }
  }
  return out;
}

// ---------------------------------------------------------------- estimate

EstimateStudy estimate_study(const ConvexPolygon& polygon, double r, double spacing, double h, double source_h,
                             const std::vector<double>& p_list, const ExecutionOptions& opts) {
  EstimateStudy out;
  out.r = r;
  out.spacing = spacing;
  out.h = h;
  const SymmetrizationContext ctx(Domain(round_approximate(polygon, r, spacing)));
  out.L = ctx.diameter;
  out.centers = ctx.domain.round().centers().size();
  out.hausdorff = boundary_hausdorff(Domain(polygon), ctx.domain, 0.25 * spacing);

  const PreparedSource ps = resolve_seams(ctx, clipped_quadrature(polygon.vertices(), 1.0, source_h));
  out.points = ps.quadrature.size();
  out.seam_points = ps.seam_points;
  const MapPlan proj = plan_from_map(ps.quadrature, projection_map(ctx.domain));
  const MapPlan radial = plan_from_map(ps.quadrature, symmetrization_map(ctx));
  const GridSpec g = aligned_grid(ctx.enclosing, h);
  DensityField sigma = deposit_transport_density(proj, g, opts);
  const DensityField radial_full = deposit_transport_density(radial, g, opts);
  out.restriction_discrepancy = restriction_discrepancy(radial_full, sigma, ctx.domain);
  const DensityField radial_in = restrict_to(radial_full, ctx.domain);
  const DensityField source = rasterize_polygon(g, polygon.vertices(), 1.0);

  for (double p : p_list) {
    EstimateRow row;
    row.p = p;
    row.sigma_norm = lp_norm(sigma, p);
    row.radial_norm = lp_norm(radial_in, p);
    row.source_norm = lp_norm(source, p);
    row.ratio = row.sigma_norm / row.source_norm;
    row.constant = lp_constant(r, out.L, 2, p);
    row.diam_factor = (1.0 + r / (2.0 * out.L)) * out.L;
    row.bound = row.constant * row.diam_factor;
    row.holds = row.ratio <= row.bound;
    out.rows.push_back(row);
  }
  out.sigma = std::move(sigma);
  return out;
}

std::vector<ScalarMap> stability_test_functions(const Box& box) {
  static constexpr std::pair<int, int> kModes[] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 1},
                                                   {1, 2}, {2, 2}, {3, 1}, {1, 3}, {3, 2}};
  std::vector<ScalarMap> out;
  for (const auto& [j, k] : kModes) {
    out.push_back([box, j, k](const Vec2& x) {
      const double u = (x.x - box.lo.x) / box.width();
      const double v = (x.y - box.lo.y) / box.height();
      return std::cos(std::numbers::pi * j * u) * std::cos(std::numbers::pi * k * v);
    });
  }
  return out;
}

// ---------------------------------------------------------------- approxstudy

StabilityStudy stability_study(const ConvexPolygon& polygon, double r, const std::vector<double>& spacings,
                               double source_h) {
  StabilityStudy out;
  out.r = r;
  // Staggered lattice: for the square no point lies on a diagonal, where the
  // limit's tie-break would send a whole row of points to one face and bias
  // the integrals at O(source_h); points then straddle every seam evenly.
  const Quadrature q = clipped_quadrature(polygon.vertices(), 1.0, source_h, {0.5 * source_h, 0.0});
  const SymmetrizationContext limit_ctx{Domain(polygon)};
  const auto phis = stability_test_functions(limit_ctx.domain.bounds());

  const MapPlan limit = plan_from_map(resolve_seams(limit_ctx, q).quadrature, projection_map(limit_ctx.domain));
  for (const auto& phi : phis) out.limit_integrals.push_back(segment_integral(limit, phi));

  for (double spacing : spacings) {
    StabilityRow row;
    row.spacing = spacing;
    const SymmetrizationContext ctx(Domain(round_approximate(polygon, r, spacing)));
    row.centers = ctx.domain.round().centers().size();
    row.hausdorff = boundary_hausdorff(limit_ctx.domain, ctx.domain, 0.25 * spacing);
    const MapPlan plan = plan_from_map(resolve_seams(ctx, q).quadrature, symmetrization_map(ctx));
    for (const auto& phi : phis) row.integrals.push_back(segment_integral(plan, phi, &ctx.domain));
    row.discrepancy = l2_relative(row.integrals, out.limit_integrals);
    out.rows.push_back(std::move(row));
  }
  out.monotone = true;
  for (std::size_t k = 1; k < out.rows.size(); ++k)
    if (out.rows[k].discrepancy > out.rows[k - 1].discrepancy) out.monotone = false;
  if (!out.rows.empty() && out.rows.front().discrepancy > 0.0)
    out.final_over_initial = out.rows.back().discrepancy / out.rows.front().discrepancy;
  return out;
}

// ---------------------------------------------------------------- beckmann

BeckmannStudy beckmann_study(const ConvexPolygon& polygon, const SourceSpec& source, std::size_t n,
                             std::size_t subdivision, const SolveOptions& base, std::uint64_t uniqueness_seed) {
  if (n < 8) throw std::invalid_argument("Beckmann resolution must be at least 8");
  BeckmannStudy out;
  out.n = n;
  const Domain domain(polygon);
  const Box& bb = domain.bounds();
  const double h = std::max(bb.width(), bb.height()) / static_cast<double>(n);
  // One absorbing ring of cells around the domain's bounding box.
  GridSpec g;
  g.h = h;
  g.origin = bb.lo - Vec2{h, h};
  g.nx = static_cast<std::size_t>(std::ceil(bb.width() / h - 1e-9)) + 2;
  g.ny = static_cast<std::size_t>(std::ceil(bb.height() / h - 1e-9)) + 2;

  const DensityField f =
      rasterize_polygon(g, source.polygon.empty() ? polygon.vertices() : source.polygon, source.value);
  out.mass = f.mass();
  const MapPlan plan = plan_from_map(quadrature_of(f, subdivision), projection_map(domain));
  out.plan_cost = transport_cost(plan);
  out.sigma = deposit_transport_density(plan, g);

  SolveOptions opts = base;
  opts.mode = FlowMode::kDirichlet;
  opts.interior = interior_mask(g, domain);
  opts.seed = 0;
  MinFlowResult res = solve_min_flow(f, opts);
  out.magnitude = flow_magnitude(res.flow);
  out.discrepancy = restriction_discrepancy(out.magnitude, out.sigma, domain);
  out.mk = mk_residuals(out.magnitude, res.report.u, f, opts.interior);
  out.relative_residual = out.mass > 0.0 ? res.report.residual / out.mass : res.report.residual;
  if (uniqueness_seed != 0) {
    SolveOptions other = opts;
    other.seed = uniqueness_seed;
    const MinFlowResult second = solve_min_flow(f, other);
    out.uniqueness_discrepancy = restriction_discrepancy(flow_magnitude(second.flow), out.magnitude, domain);
  }
  out.report = std::move(res.report);
  out.flow = std::move(res.flow);
  return out;
}

// ---------------------------------------------------------------- counterexample

CounterexampleStudy counterexample_study(const CounterexampleConfig& cfg, const ExecutionOptions& opts) {
  if (cfg.h_list.empty()) throw std::invalid_argument("counterexample needs at least one grid size");
  CounterexampleStudy out;
  const MapPlan plan = counterexample_plan(cfg.source_h, cfg.subdivision);
  out.points = plan.size();
  out.source_mass = plan.source.mass();

  const std::size_t nb = std::max<std::size_t>(2, cfg.mass_balance_count);
  for (std::size_t i = 0; i < nb; ++i) {
    const double eps = static_cast<double>(i) / static_cast<double>(nb - 1);
    const MassBalance mb = mass_balance(eps);
    const double err = std::abs(mb.source - mb.target);
    out.mass_balance_eps.push_back(eps);
    out.mass_balance_error.push_back(err);
    out.max_mass_balance_error = std::max(out.max_mass_balance_error, err);
  }
  for (double r : cfg.tangency_r) {
    out.tangency_r.push_back(r);
    out.tangency_ratio.push_back(tangency_eps(r) / std::sqrt(r));
  }
  out.window = sigma_window(cfg.window_eps, cfg.window_n);

  for (double h : cfg.h_list) {
    out.sigma_by_h.push_back(counterexample_sigma(plan, h, opts));
    out.max_near_apex.push_back(max_near_apex(out.sigma_by_h.back(), 0.05));
    out.analytic_discrepancy.push_back(analytic_discrepancy(out.sigma_by_h.back(), 0.1));
  }
  out.balls = ball_scaling(out.sigma_by_h.back(), geometric_radii(cfg.r_min, cfg.r_max, cfg.r_count));
  out.lp = lp_threshold_study(out.sigma_by_h, cfg.p_list);
  out.l4_increasing = true;
  for (std::size_t k = 1; k < out.sigma_by_h.size(); ++k)
    if (!(lp_norm(out.sigma_by_h[k], 4.0) > lp_norm(out.sigma_by_h[k - 1], 4.0))) out.l4_increasing = false;

  // T_# f+ on [2,3] against the uniform target.
  std::vector<std::pair<double, double>> image;
  image.reserve(plan.size());
  out.histogram.assign(std::max<std::size_t>(1, cfg.histogram_bins), 0.0);
  const auto bins = static_cast<double>(out.histogram.size());
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const double t = plan.dest[k].x - 2.0;
    image.emplace_back(t, plan.source.weights[k]);
    const auto bin = std::min(out.histogram.size() - 1, static_cast<std::size_t>(std::max(0.0, t) * bins));
    out.histogram[bin] += plan.source.weights[k];
  }
  std::sort(image.begin(), image.end());
  double cdf = 0.0;
  for (const auto& [t, w] : image) {
    out.ks_statistic = std::max(out.ks_statistic, std::abs(cdf - t));
    cdf += w / out.source_mass;
    out.ks_statistic = std::max(out.ks_statistic, std::abs(cdf - t));
  }
  out.ks_threshold = 2.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, plan.size())));

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < cfg.roundtrip_samples; ++k) {
    const double eps = 1.0 - unit(rng);  // (0, 1]
    const double s = unit(rng);
    const Vec2 x = point_of_eps_s(eps, s);
    if (distance(x, kApex) <= 1e-9) continue;
    const RayCoordinates rc = eps_s_of_point(x);
    out.roundtrip_error = std::max({out.roundtrip_error, std::abs(rc.eps - eps), std::abs(rc.s - s)});
  }
  return out;
}

}  // namespace tdlab
