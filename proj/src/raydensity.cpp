#include "tdlab/raydensity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>

#include "tdlab/errors.hpp"

namespace tdlab {

std::size_t worker_count() {
  if (const char* env = std::getenv("TDLAB_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

MapPlan plan_from_map(const Quadrature& q, const PointMap& map) {
  MapPlan plan;
  plan.source = q;
  plan.dest.reserve(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    Vec2 y;
    try {
      y = map(q.points[k]);
    } catch (const std::exception& e) {
      throw MapError(k, e.what());
    }
    if (!std::isfinite(y.x) || !std::isfinite(y.y)) throw MapError(k, "non-finite destination");
    plan.dest.push_back(y);
  }
  return plan;
}

namespace {

// Adds w * length([a,b] ∩ cell) to acc[cell] for every cell the segment
// crosses. Crossing parameters are recomputed from the grid-line index at
// every step, so no error accumulates along long segments.
void deposit_segment(const GridSpec& g, const Vec2& a, const Vec2& b, double w, std::vector<double>& acc) {
  const double len = distance(a, b);
  if (len == 0.0 || w == 0.0) return;
  const double ax = (a.x - g.origin.x) / g.h;
  const double ay = (a.y - g.origin.y) / g.h;
  const double dx = (b.x - g.origin.x) / g.h - ax;
  const double dy = (b.y - g.origin.y) / g.h - ay;
  const double inf = std::numeric_limits<double>::infinity();

  long kx = 0, ky = 0;
  const long sx = dx > 0.0 ? 1 : -1;
  const long sy = dy > 0.0 ? 1 : -1;
  auto next_t = [](long k, double a0, double d) { return (static_cast<double>(k) - a0) / d; };
  double tx = inf, ty = inf;
  if (dx != 0.0) {
    kx = dx > 0.0 ? static_cast<long>(std::floor(ax)) + 1 : static_cast<long>(std::ceil(ax)) - 1;
    tx = next_t(kx, ax, dx);
  }
  if (dy != 0.0) {
    ky = dy > 0.0 ? static_cast<long>(std::floor(ay)) + 1 : static_cast<long>(std::ceil(ay)) - 1;
    ty = next_t(ky, ay, dy);
  }
  const long nx = static_cast<long>(g.nx);
  const long ny = static_cast<long>(g.ny);
  const double wl = w * len;
  double t = 0.0;
  while (t < 1.0) {
    const double tn = std::min({tx, ty, 1.0});
    if (tn > t) {
      const double tm = 0.5 * (t + tn);
      const long i = std::clamp(static_cast<long>(std::floor(ax + dx * tm)), 0L, nx - 1);
      const long j = std::clamp(static_cast<long>(std::floor(ay + dy * tm)), 0L, ny - 1);
      acc[static_cast<std::size_t>(j * nx + i)] += wl * (tn - t);
      t = tn;
    }
    if (tx <= tn) {
      kx += sx;
      tx = next_t(kx, ax, dx);
    }
    if (ty <= tn) {
      ky += sy;
      ty = next_t(ky, ay, dy);
    }
  }
}

bool inside_grid(const GridSpec& g, const Vec2& p) {
  const Box b = g.bounds();
  const double tol = 1e-12 * std::max(1.0, b.diagonal());
  return p.x >= b.lo.x - tol && p.x <= b.hi.x + tol && p.y >= b.lo.y - tol && p.y <= b.hi.y + tol;
}

}  // namespace

DensityField deposit_transport_density(const MapPlan& plan, const GridSpec& grid, const ExecutionOptions& opts) {
  grid.validate();
  for (std::size_t k = 0; k < plan.size(); ++k) {
    if (!inside_grid(grid, plan.source.points[k]) || !inside_grid(grid, plan.dest[k])) throw OutOfGrid(k);
  }
  DensityField sigma(grid);
  const std::size_t workers = opts.deterministic ? 1 : (opts.workers ? opts.workers : worker_count());
  if (workers <= 1 || plan.size() < 2 * workers) {
    for (std::size_t k = 0; k < plan.size(); ++k)
      deposit_segment(grid, plan.source.points[k], plan.dest[k], plan.source.weights[k], sigma.values);
  } else {
    std::vector<std::vector<double>> buffers(workers, std::vector<double>(grid.size(), 0.0));
    std::vector<std::thread> pool;
    const std::size_t chunk = (plan.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(plan.size(), lo + chunk);
        for (std::size_t k = lo; k < hi; ++k)
          deposit_segment(grid, plan.source.points[k], plan.dest[k], plan.source.weights[k], buffers[w]);
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& buf : buffers)  // fixed merge order
      for (std::size_t i = 0; i < buf.size(); ++i) sigma.values[i] += buf[i];
  }
  const double area = grid.cell_area();
  for (double& v : sigma.values) v /= area;
  return sigma;
}

double transport_cost(const MapPlan& plan) {
  double c = 0.0;
  for (std::size_t k = 0; k < plan.size(); ++k)
    c += plan.source.weights[k] * distance(plan.source.points[k], plan.dest[k]);
  return c;
}

LipschitzCheck check_lipschitz(const Potential& u, const MapPlan& plan, std::size_t samples, std::uint64_t seed) {
  LipschitzCheck out;
  auto ratio = [&](const Vec2& a, const Vec2& b) {
    const double d = distance(a, b);
    if (d <= 1e-12) return;
    out.max_ratio = std::max(out.max_ratio, std::abs(u.eval(a) - u.eval(b)) / d);
    ++out.pairs;
  };
  if (plan.size() == 0) return out;
  Box box{plan.source.points.front(), plan.source.points.front()};
  auto grow = [&](const Vec2& p) {
    box.lo = {std::min(box.lo.x, p.x), std::min(box.lo.y, p.y)};
    box.hi = {std::max(box.hi.x, p.x), std::max(box.hi.y, p.y)};
  };
  for (std::size_t k = 0; k < plan.size(); ++k) {
    grow(plan.source.points[k]);
    grow(plan.dest[k]);
    ratio(plan.source.points[k], plan.dest[k]);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x);
  std::uniform_real_distribution<double> uy(box.lo.y, box.hi.y);
  std::uniform_int_distribution<std::size_t> pick(0, plan.size() - 1);
  for (std::size_t s = 0; s < samples; ++s) {
    if (s % 2 == 0) {
      ratio({ux(rng), uy(rng)}, {ux(rng), uy(rng)});
    } else {
      const std::size_t a = pick(rng);
      const std::size_t b = pick(rng);
      ratio(plan.dest[a], plan.source.points[b]);
    }
  }
  return out;
}

double duality_gap(const MapPlan& plan, const Potential& u) {
  if (u.lip > 1.0 + 1e-12) throw NotLip1("potential Lipschitz constant exceeds 1");
  const LipschitzCheck chk = check_lipschitz(u, plan);
  if (chk.max_ratio > u.lip + 1e-9)
    throw NotLip1("sampled Lipschitz ratio " + std::to_string(chk.max_ratio) + " exceeds the claimed constant");
  // Termwise differences keep the gap accurate to rounding of each term.
  double gap = 0.0;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const Vec2& x = plan.source.points[k];
    const Vec2& y = plan.dest[k];
    gap += plan.source.weights[k] * (distance(x, y) - (u.eval(x) - u.eval(y)));
  }
  return gap;
}

double segment_integral(const MapPlan& plan, const ScalarMap& phi, const Domain* restrict_to) {
  using Gauss = boost::math::quadrature::gauss<double, 5>;
  double total = 0.0;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const Vec2 x = plan.source.points[k];
    Vec2 y = plan.dest[k];
    if (restrict_to != nullptr) {
      for (double t : boundary_crossings(*restrict_to, x, y)) {
        if (t > 0.0) {
          y = x + (y - x) * t;
          break;
        }
      }
    }
    const double len = distance(x, y);
    if (len == 0.0) continue;
    total += plan.source.weights[k] * len * Gauss::integrate([&](double t) { return phi(x + (y - x) * t); }, 0.0, 1.0);
  }
  return total;
}

double restriction_discrepancy(const DensityField& full, const DensityField& projected, const Domain& domain) {
  if (!(full.grid == projected.grid)) throw GridMismatch("transport densities live on different grids");
  const GridSpec& g = full.grid;
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      if (!domain.contains(g.cell_center(i, j))) continue;
      diff += std::abs(full.at(i, j) - projected.at(i, j));
      ref += std::abs(projected.at(i, j));
    }
  }
  if (ref == 0.0) return diff == 0.0 ? 0.0 : kInfinity;
  return diff / ref;
}

}  // namespace tdlab
