#pragma once

// Named experiments built from the library modules. Each study returns plain
// numbers (and the fields it produced) so that the CLI and the acceptance
// harness report exactly what the modules computed.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tdlab/beckmann.hpp"
#include "tdlab/counterexample.hpp"
#include "tdlab/fields.hpp"
#include "tdlab/geometry.hpp"
#include "tdlab/raydensity.hpp"
#include "tdlab/symmetrize.hpp"

namespace tdlab {

/// f+ = value on `polygon`, or on the whole domain when `polygon` is empty.
struct SourceSpec {
  std::vector<Vec2> polygon;
  double value = 1.0;
};

/// Quadrature of the source at spacing d: exact clipping for polygons,
/// midpoint cells inside the domain otherwise.
Quadrature source_quadrature(const Domain& domain, const SourceSpec& source, double d);

/// The unit square [0,1]^2.
ConvexPolygon unit_square();

/// Q = [0.3,0.7] x [0,0.2], the strip source resting on the bottom face.
std::vector<Vec2> strip_polygon();

// ---------------------------------------------------------------- project

struct ProjectStudy {
  std::size_t points = 0;
  double source_mass = 0.0;
  double boundary_mass = 0.0;
  double max_density = 0.0;
  std::size_t ties = 0;
  double cost = 0.0;
  BoundaryMeasure measure;
};
ProjectStudy project_study(const Domain& domain, const Quadrature& q, double bin_width);

// ---------------------------------------------------------------- symmetrize

/// Optimality certificate of the symmetrization plan with the closed-form
/// potential.
struct CertificateStudy {
  std::string map;  // "reflection" or "radial"
  std::size_t points = 0;
  std::size_t seam_points = 0;
  double cost = 0.0;
  double gap = 0.0;
  double relative_gap = 0.0;
  double lipschitz_ratio = 0.0;
  std::size_t lipschitz_pairs = 0;
  /// Segments checked for "one boundary crossing, at the projection point".
  std::size_t ray_checked = 0;
  std::size_t ray_violations = 0;
  double max_ray_error = 0.0;
};
CertificateStudy certificate_study(const SymmetrizationContext& ctx, const Quadrature& q);

/// Determinant bound of the radial map for a single center at the origin,
/// sampled on the annulus r < |x| <= r + L, plus the density-mode pushforward
/// of f+ = 1 on a box inside that annulus.
struct JacobianStudy {
  double r = 0.0;
  double L = 0.0;
  std::size_t samples = 0;
  double min_det = 0.0;
  double det_bound = 0.0;  // jacobian_lower_bound(r, L, 2)
  double max_fd_relative_error = 0.0;
  double max_pushforward_density = 0.0;
  double density_bound = 0.0;  // 1 / det_bound
  struct LpRow {
    double p = 0.0;
    double ratio = 0.0;  // ||T_# f+||_p / ||f+||_p
    double constant = 0.0;  // lp_constant(r, L, 2, p)
  };
  std::vector<LpRow> lp;
};
JacobianStudy jacobian_study(double r, double L, std::size_t samples, std::uint64_t seed, double h,
                             const std::vector<double>& p_list);

/// Finite-difference determinant of the direct exterior map over points
/// sampled in the domain.
struct DirectMapStudy {
  double c = 0.0;
  DeterminantSweep sweep;
};
DirectMapStudy direct_map_study(const SymmetrizationContext& ctx, std::size_t samples, std::uint64_t seed);

// ---------------------------------------------------------------- density

/// Restriction identity: symmetrization plan vs projection plan on the same
/// grid, for each cell size, on the aligned grid and on the grid shifted by
/// h/2 (which puts cell centers on axis-parallel faces).
struct RestrictionRow {
  double h = 0.0;
  bool offset = false;
  double discrepancy = 0.0;
};
struct RestrictionStudy {
  std::size_t points = 0;
  double projection_cost = 0.0;
  double symmetric_cost = 0.0;
  std::vector<RestrictionRow> rows;
  DensityField sigma;  // projection density at the first h, aligned grid
};
RestrictionStudy restriction_study(const SymmetrizationContext& ctx, const Quadrature& q,
                                   const std::vector<double>& h_list, const ExecutionOptions& opts = {});

/// Aligned grid of cell size h covering `box` (origin a multiple of h).
GridSpec aligned_grid(const Box& box, double h);
/// The same grid shifted by -h/2 in both directions, one cell larger.
GridSpec offset_grid(const Box& box, double h);

// ---------------------------------------------------------------- estimate

struct EstimateRow {
  double p = 0.0;
  double sigma_norm = 0.0;     // ||sigma(f+, P_# f+)||_p on the round approximation
  double radial_norm = 0.0;    // ||radial sigma restricted to the round domain||_p
  double source_norm = 0.0;    // ||f+||_p
  double ratio = 0.0;          // sigma_norm / source_norm
  double constant = 0.0;       // lp_constant(r, L, 2, p)
  double diam_factor = 0.0;    // (1 + r / (2L)) L
  double bound = 0.0;          // constant * diam_factor
  bool holds = false;
};
struct EstimateStudy {
  double r = 0.0;
  double spacing = 0.0;
  double L = 0.0;
  double h = 0.0;
  std::size_t centers = 0;
  std::size_t points = 0;
  std::size_t seam_points = 0;
  double hausdorff = 0.0;
  double restriction_discrepancy = 0.0;
  std::vector<EstimateRow> rows;
  DensityField sigma;
};
/// f+ = 1 on `polygon`, domain = round_approximate(polygon, r, spacing).
EstimateStudy estimate_study(const ConvexPolygon& polygon, double r, double spacing, double h, double source_h,
                             const std::vector<double>& p_list, const ExecutionOptions& opts = {});

/// cos(pi j x') cos(pi k y') with (x', y') the coordinates normalized to the
/// bounding box; ten fixed (j, k) pairs.
std::vector<ScalarMap> stability_test_functions(const Box& box);

// ---------------------------------------------------------------- approxstudy

struct StabilityRow {
  double spacing = 0.0;
  std::size_t centers = 0;
  double hausdorff = 0.0;
  double discrepancy = 0.0;  // ||I_k - I||_2 / ||I||_2
  std::vector<double> integrals;
};
struct StabilityStudy {
  double r = 0.0;
  std::vector<double> limit_integrals;  // projection plan on the polygon itself
  std::vector<StabilityRow> rows;
  bool monotone = false;
  double final_over_initial = 0.0;
};
/// sigma_k of the radial plan on round_approximate(polygon, r, spacing_k),
/// restricted to that round domain, against sigma of the polygon's own
/// projection plan, through integrals of smooth test functions. The source
/// lattice is staggered by (source_h / 2, 0) so that no quadrature point sits
/// on a diagonal seam of an axis-aligned square.
StabilityStudy stability_study(const ConvexPolygon& polygon, double r, const std::vector<double>& spacings,
                               double source_h);

// ---------------------------------------------------------------- beckmann

struct BeckmannStudy {
  std::size_t n = 0;
  double mass = 0.0;
  double plan_cost = 0.0;
  SolveReport report;
  double relative_residual = 0.0;  // residual / mass
  double discrepancy = 0.0;        // |v| vs deposited sigma, relative L1 over the domain
  MkResiduals mk;
  double uniqueness_discrepancy = -1.0;  // second run from a random start; -1 if skipped
  DensityField sigma;
  DensityField magnitude;
  StaggeredFlow flow;
};
/// Dirichlet minimal flow of f+ = value on `source` inside the polygon, on
/// an n x n discretization of the polygon's bounding box plus one absorbing
/// ring of cells, against the deposited projection density. The solver starts
/// from zero; a nonzero `uniqueness_seed` adds a second run from that random
/// start and compares the two flow magnitudes.
BeckmannStudy beckmann_study(const ConvexPolygon& polygon, const SourceSpec& source, std::size_t n,
                             std::size_t subdivision, const SolveOptions& base, std::uint64_t uniqueness_seed = 0);

// ---------------------------------------------------------------- counterexample

struct CounterexampleConfig {
  double source_h = 1.0 / 512.0;
  std::size_t subdivision = 1;
  std::vector<double> h_list{1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0};
  std::vector<double> p_list{2.0, 2.5, 3.5, 4.0};
  double r_min = 0.01;
  double r_max = 0.1;
  std::size_t r_count = 10;
  std::size_t mass_balance_count = 100;
  double window_eps = 0.2;
  std::size_t window_n = 50;
  std::vector<double> tangency_r{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  std::size_t histogram_bins = 100;
  std::size_t roundtrip_samples = 100000;
  std::uint64_t seed = 7;
};

struct CounterexampleStudy {
  std::size_t points = 0;
  double source_mass = 0.0;
  double max_mass_balance_error = 0.0;
  std::vector<double> mass_balance_eps;
  std::vector<double> mass_balance_error;
  /// eps_r / sqrt(r) for each tangency radius; eps_r ~ sqrt(3 r / 2) as r -> 0
  /// since the distance from (2,0) to l_eps is about 2 eps^2 / 3.
  std::vector<double> tangency_r;
  std::vector<double> tangency_ratio;
  SigmaWindow window;
  BallScaling balls;  // on the finest grid
  LpStudy lp;
  bool l4_increasing = false;
  std::vector<double> max_near_apex;  // per h
  std::vector<double> analytic_discrepancy;  // per h
  /// Pushforward of f+ by T binned on [2,3]; f- is uniform there.
  std::vector<double> histogram;
  double ks_statistic = 0.0;
  double ks_threshold = 0.0;  // 2 / sqrt(points)
  double roundtrip_error = 0.0;
  std::vector<DensityField> sigma_by_h;
};
CounterexampleStudy counterexample_study(const CounterexampleConfig& cfg, const ExecutionOptions& opts = {});

}  // namespace tdlab
