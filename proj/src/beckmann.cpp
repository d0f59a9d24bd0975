#include "tdlab/beckmann.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tdlab {

DensityField divergence(const StaggeredFlow& v) {
  const GridSpec& g = v.grid;
  DensityField d(g);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      d.at(i, j) = (v.x(i + 1, j) - v.x(i, j) + v.y(i, j + 1) - v.y(i, j)) / g.h;
  return d;
}

StaggeredFlow face_gradient(const DensityField& phi) {
  const GridSpec& g = phi.grid;
  StaggeredFlow grad(g);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 1; i < g.nx; ++i) grad.x(i, j) = (phi.at(i, j) - phi.at(i - 1, j)) / g.h;
  for (std::size_t j = 1; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) grad.y(i, j) = (phi.at(i, j) - phi.at(i, j - 1)) / g.h;
  return grad;
}

double inner(const DensityField& a, const DensityField& b) {
  if (!(a.grid == b.grid)) throw GridMismatch("inner product of fields on different grids");
  double s = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) s += a.values[k] * b.values[k];
  return s * a.grid.cell_area();
}

double inner(const StaggeredFlow& a, const StaggeredFlow& b) {
  if (!(a.grid == b.grid)) throw GridMismatch("inner product of flows on different grids");
  double s = 0.0;
  for (std::size_t k = 0; k < a.vx.size(); ++k) s += a.vx[k] * b.vx[k];
  for (std::size_t k = 0; k < a.vy.size(); ++k) s += a.vy[k] * b.vy[k];
  return s * a.grid.cell_area();
}

DensityField flow_magnitude(const StaggeredFlow& v) {
  const GridSpec& g = v.grid;
  DensityField m(g);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double ax = 0.5 * (v.x(i, j) + v.x(i + 1, j));
      const double ay = 0.5 * (v.y(i, j) + v.y(i, j + 1));
      m.at(i, j) = std::hypot(ax, ay);
    }
  }
  return m;
}

double flow_cost(const StaggeredFlow& v) {
  const GridSpec& g = v.grid;
  double c = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) c += std::hypot(v.x(i + 1, j), v.y(i, j + 1));
  return c * g.cell_area();
}

DensityField gradient_norm(const DensityField& u) {
  const GridSpec& g = u.grid;
  DensityField n(g);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double gx = i + 1 < g.nx ? (u.at(i + 1, j) - u.at(i, j)) / g.h : 0.0;
      const double gy = j + 1 < g.ny ? (u.at(i, j + 1) - u.at(i, j)) / g.h : 0.0;
      n.at(i, j) = std::hypot(gx, gy);
    }
  }
  return n;
}

std::vector<char> interior_mask(const GridSpec& grid, const Domain& domain) {
  std::vector<char> mask(grid.size(), 0);
  for (std::size_t j = 0; j < grid.ny; ++j)
    for (std::size_t i = 0; i < grid.nx; ++i) mask[grid.index(i, j)] = domain.contains(grid.cell_center(i, j)) ? 1 : 0;
  return mask;
}

namespace {

// Chambolle-Pock on  min_p ||p||_1 + <y, D p - f>_C  with p the
// forward-paired face flow and y the multiplier on constrained cells.
// Both spaces use h^2-weighted inner products, so D* = -grad and
// ||D||^2 <= 8 / h^2.
class PrimalDual {
 public:
  PrimalDual(const GridSpec& g, std::vector<double> f, std::vector<char> constrained)
      : g_(g),
        nx_(g.nx),
        ny_(g.ny),
        f_(std::move(f)),
        c_(std::move(constrained)),
        px_((nx_ + 1) * ny_, 0.0),
        py_(nx_ * (ny_ + 1), 0.0),
        bx_(px_),
        by_(py_),
        y_(g.size(), 0.0) {
    const double L = std::sqrt(8.0) / g.h;
    tau_ = 0.99 / L;
    sigma_ = 0.99 / L;
  }

  void randomize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (std::size_t j = 0; j < ny_; ++j)
      for (std::size_t i = 1; i < nx_; ++i) px_[j * (nx_ + 1) + i] = U(rng);
    for (std::size_t j = 1; j < ny_; ++j)
      for (std::size_t i = 0; i < nx_; ++i) py_[j * nx_ + i] = U(rng);
    for (std::size_t k = 0; k < y_.size(); ++k)
      if (c_[k]) y_[k] = U(rng);
    bx_ = px_;
    by_ = py_;
  }

  void step() {
    const double h = g_.h;
    // Dual ascent on the constraint.
    for (std::size_t j = 0; j < ny_; ++j) {
      for (std::size_t i = 0; i < nx_; ++i) {
        const std::size_t k = j * nx_ + i;
        if (!c_[k]) continue;
        const double div =
            (bx_[j * (nx_ + 1) + i + 1] - bx_[j * (nx_ + 1) + i] + by_[(j + 1) * nx_ + i] - by_[k]) / h;
        y_[k] += sigma_ * (div - f_[k]);
      }
    }
    // Primal descent: p - tau D* y = p + tau grad y, then cellwise shrinkage
    // of the (right face, top face) pairs. Boundary faces stay zero.
    for (std::size_t j = 0; j < ny_; ++j) {
      for (std::size_t i = 0; i < nx_; ++i) {
        const std::size_t k = j * nx_ + i;
        const std::size_t fx = j * (nx_ + 1) + i + 1;
        const std::size_t fy = (j + 1) * nx_ + i;
        const bool has_x = i + 1 < nx_;
        const bool has_y = j + 1 < ny_;
        const double qx = has_x ? px_[fx] + tau_ * (y_[k + 1] - y_[k]) / h : 0.0;
        const double qy = has_y ? py_[fy] + tau_ * (y_[k + nx_] - y_[k]) / h : 0.0;
        const double n = std::hypot(qx, qy);
        const double scale = n > tau_ ? 1.0 - tau_ / n : 0.0;
        if (has_x) {
          const double nv = scale * qx;
          bx_[fx] = 2.0 * nv - px_[fx];
          px_[fx] = nv;
        }
        if (has_y) {
          const double nv = scale * qy;
          by_[fy] = 2.0 * nv - py_[fy];
          py_[fy] = nv;
        }
      }
    }
  }

  StaggeredFlow flow(double scale) const {
    StaggeredFlow v(g_);
    for (std::size_t k = 0; k < px_.size(); ++k) v.vx[k] = scale * px_[k];
    for (std::size_t k = 0; k < py_.size(); ++k) v.vy[k] = scale * py_[k];
    return v;
  }

  /// Feasible potential u = -y / max(1, max |grad_h y|).
  DensityField potential() const {
    DensityField u(g_);
    for (std::size_t k = 0; k < y_.size(); ++k) u.values[k] = -y_[k];
    const DensityField gn = gradient_norm(u);
    const double m = *std::max_element(gn.values.begin(), gn.values.end());
    if (m > 1.0)
      for (double& x : u.values) x /= m;
    return u;
  }

  double residual() const {
    const double h = g_.h;
    double r = 0.0;
    for (std::size_t j = 0; j < ny_; ++j) {
      for (std::size_t i = 0; i < nx_; ++i) {
        const std::size_t k = j * nx_ + i;
        if (!c_[k]) continue;
        const double div =
            (px_[j * (nx_ + 1) + i + 1] - px_[j * (nx_ + 1) + i] + py_[(j + 1) * nx_ + i] - py_[k]) / h;
        r += std::abs(div - f_[k]);
      }
    }
    return r * g_.cell_area();
  }

  double dual_value(const DensityField& u) const {
    double s = 0.0;
    for (std::size_t k = 0; k < y_.size(); ++k)
      if (c_[k]) s += u.values[k] * f_[k];
    return s * g_.cell_area();
  }

 private:
  GridSpec g_;
  std::size_t nx_, ny_;
  std::vector<double> f_;
  std::vector<char> c_;
  std::vector<double> px_, py_, bx_, by_, y_;
  double tau_ = 0.0, sigma_ = 0.0;
};

}  // namespace

MinFlowResult solve_min_flow(const DensityField& f, const SolveOptions& opts) {
  const GridSpec& g = f.grid;
  g.validate();
  double l1 = 0.0, total = 0.0;
  for (double v : f.values) {
    l1 += std::abs(v);
    total += v;
  }
  l1 *= g.cell_area();
  total *= g.cell_area();

  std::vector<char> constrained(g.size(), 1);
  if (opts.mode == FlowMode::kNoFlux) {
    if (std::abs(total) > 1e-9 * l1) throw Infeasible("no-flux mode needs balanced data; net mass " + std::to_string(total));
  } else {
    if (!opts.interior.empty()) {
      if (opts.interior.size() != g.size()) throw GridMismatch("interior mask size differs from the grid");
      constrained = opts.interior;
    } else {
      for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i)
          if (i == 0 || j == 0 || i + 1 == g.nx || j + 1 == g.ny) constrained[g.index(i, j)] = 0;
    }
    if (std::all_of(constrained.begin(), constrained.end(), [](char c) { return c != 0; }))
      throw Infeasible("Dirichlet mode needs at least one absorbing cell");
  }

  MinFlowResult out;
  if (l1 == 0.0) {
    out.flow = StaggeredFlow(g);
    out.report.u = DensityField(g);
    out.report.converged = true;
    return out;
  }

  // Solve for f / ||f||_1 and rescale: the output is then exactly
  // 1-homogeneous in f and the tolerances are scale free.
  std::vector<double> fn(f.values);
  for (double& v : fn) v /= l1;
  PrimalDual pd(g, std::move(fn), constrained);
  if (opts.seed != 0) pd.randomize(opts.seed);

  SolveReport& rep = out.report;
  double prev_objective = kInfinity;
  bool converged = false;
  std::size_t it = 0;
  while (it < opts.max_iter) {
    pd.step();
    ++it;
    if (it % 100 != 0 && it != opts.max_iter) continue;
    const StaggeredFlow v = pd.flow(1.0);
    const double obj = flow_cost(v);
    const double res = pd.residual();
    const DensityField u = pd.potential();
    const double gap = obj - pd.dual_value(u);
    rep.history.push_back({it, obj * l1, res * l1, gap * l1});
    const double change = std::abs(obj - prev_objective) / std::max(obj, 1e-300);
    prev_objective = obj;
    if (res <= opts.tol && change <= opts.tol) {
      converged = true;
      break;
    }
  }
  out.flow = pd.flow(l1);
  rep.iterations = it;
  rep.objective = flow_cost(out.flow);
  rep.residual = pd.residual() * l1;
  rep.u = pd.potential();
  rep.gap = std::max(0.0, rep.objective - pd.dual_value(rep.u) * l1);
  rep.converged = converged;
  if (!converged) throw MaxIterExceeded(std::move(out));
  return out;
}

MkResiduals mk_residuals(const DensityField& sigma, const DensityField& u, const DensityField& f,
                         const std::vector<char>& interior) {
  if (!(sigma.grid == u.grid) || !(sigma.grid == f.grid)) throw GridMismatch("mk_residuals needs matching grids");
  const GridSpec& g = sigma.grid;
  if (!interior.empty() && interior.size() != g.size()) throw GridMismatch("interior mask size differs from the grid");
  auto inside = [&](std::size_t k) { return interior.empty() || interior[k] != 0; };

  // Flux -sigma grad u on interior faces, sigma averaged onto the face.
  StaggeredFlow flux(g);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 1; i < g.nx; ++i)
      flux.x(i, j) = -0.5 * (sigma.at(i - 1, j) + sigma.at(i, j)) * (u.at(i, j) - u.at(i - 1, j)) / g.h;
  for (std::size_t j = 1; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      flux.y(i, j) = -0.5 * (sigma.at(i, j - 1) + sigma.at(i, j)) * (u.at(i, j) - u.at(i, j - 1)) / g.h;
  const DensityField div = divergence(flux);
  const DensityField gn = gradient_norm(u);

  MkResiduals r;
  double mass = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    r.lipschitz = std::max(r.lipschitz, gn.values[k] - 1.0);
    if (!inside(k)) continue;
    r.equation += std::abs(div.values[k] - f.values[k]);
    r.deficit += sigma.values[k] * std::max(0.0, 1.0 - gn.values[k]);
    mass += sigma.values[k];
  }
  r.equation *= g.cell_area();
  r.deficit = mass > 0.0 ? r.deficit / mass : 0.0;
  return r;
}

}  // namespace tdlab
