#pragma once

// Minimal-flow (Beckmann) problem on a staggered grid:
//   min sum_cells h^2 |v_c|  subject to  div v = f on constrained cells,
// solved by a first-order primal-dual iteration whose dual variable is the
// discrete Kantorovich potential.
//
// Grid conventions: vx lives on vertical faces ((nx+1) x ny), vy on
// horizontal faces (nx x (ny+1)); faces on the grid boundary carry no flux.
// The cost pairs cell (i,j) with its right and top faces, which makes the
// dual constraint |grad_h u| <= 1 exact per cell for the forward-difference
// gradient grad_h.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tdlab/errors.hpp"
#include "tdlab/fields.hpp"
#include "tdlab/geometry.hpp"

namespace tdlab {

enum class FlowMode {
  /// div v = f on every cell; requires balanced f.
  kNoFlux,
  /// div v = f on interior cells only; the remaining cells absorb mass and
  /// carry u = 0.
  kDirichlet,
};

struct StaggeredFlow {
  GridSpec grid;
  std::vector<double> vx;  // index j*(nx+1) + i
  std::vector<double> vy;  // index j*nx + i

  StaggeredFlow() = default;
  explicit StaggeredFlow(const GridSpec& g)
      : grid(g), vx((g.nx + 1) * g.ny, 0.0), vy(g.nx * (g.ny + 1), 0.0) {}

  double& x(std::size_t i, std::size_t j) { return vx[j * (grid.nx + 1) + i]; }
  double x(std::size_t i, std::size_t j) const { return vx[j * (grid.nx + 1) + i]; }
  double& y(std::size_t i, std::size_t j) { return vy[j * grid.nx + i]; }
  double y(std::size_t i, std::size_t j) const { return vy[j * grid.nx + i]; }
};

/// Conservative finite-volume divergence (flux balance / h).
DensityField divergence(const StaggeredFlow& v);

/// Face gradient of a cell field; boundary faces are zero. Satisfies
/// inner(divergence(v), phi) + inner(v, face_gradient(phi)) = 0 whenever v
/// vanishes on the boundary faces.
StaggeredFlow face_gradient(const DensityField& phi);

/// h^2-weighted inner products.
double inner(const DensityField& a, const DensityField& b);
double inner(const StaggeredFlow& a, const StaggeredFlow& b);

/// Cell-centered |v| from face values averaged onto cell centers.
DensityField flow_magnitude(const StaggeredFlow& v);

/// The objective sum_cells h^2 |(vx right face, vy top face)|.
double flow_cost(const StaggeredFlow& v);

/// Forward-difference cell gradient norm |grad_h u| (zero difference at the
/// last row/column).
DensityField gradient_norm(const DensityField& u);

/// Cells whose center lies in `domain`.
std::vector<char> interior_mask(const GridSpec& grid, const Domain& domain);

struct SolveOptions {
  FlowMode mode = FlowMode::kNoFlux;
  double tol = 1e-6;
  std::size_t max_iter = 200000;
  /// Constrained cells in Dirichlet mode; empty means all but the outer ring.
  std::vector<char> interior;
  /// 0: start from v = 0, u = 0; otherwise a random start from this seed.
  std::uint64_t seed = 0;
};

struct ResidualSample {
  std::size_t iteration = 0;
  double objective = 0.0;
  double residual = 0.0;
  double gap = 0.0;
};

struct SolveReport {
  std::size_t iterations = 0;
  double objective = 0.0;
  /// L1 norm of (div v - f) over the constrained cells.
  double residual = 0.0;
  /// objective - <u, f> for the reported (feasible) u; nonnegative.
  double gap = 0.0;
  bool converged = false;
  /// Discrete potential with |grad_h u| <= 1 everywhere.
  DensityField u;
  std::vector<ResidualSample> history;  // every 100 iterations
};

struct MinFlowResult {
  StaggeredFlow flow;
  SolveReport report;
};

class MaxIterExceeded : public Error {
 public:
  explicit MaxIterExceeded(MinFlowResult last)
      : Error("minimal-flow solver hit max_iter before reaching tolerance"), result(std::move(last)) {}
  MinFlowResult result;
};

/// Throws Infeasible (unbalanced f in no-flux mode, or no absorbing cell in
/// Dirichlet mode) and MaxIterExceeded (carrying the last iterate).
MinFlowResult solve_min_flow(const DensityField& f, const SolveOptions& opts);

struct MkResiduals {
  double equation = 0.0;   // (a) L1 norm of -div(sigma grad u) - f
  double lipschitz = 0.0;  // (b) max (|grad u| - 1)_+
  double deficit = 0.0;    // (c) sum sigma (1 - |grad u|)_+ / sum sigma
};

/// Monge-Kantorovich residuals; (a) and (c) are taken over `interior` cells
/// (all cells if empty). Throws GridMismatch.
MkResiduals mk_residuals(const DensityField& sigma, const DensityField& u, const DensityField& f,
                         const std::vector<char>& interior = {});

}  // namespace tdlab
