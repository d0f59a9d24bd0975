#pragma once

// Trapeze-to-segment transport: f+ is the indicator of the trapeze A with
// vertices (0,0), (1,0), (1,4/5), (0,6/5); f- is the unit linear density on
// [2,3] x {0}. Mass moves along the rays l_eps joining (0, w(eps)) and
// (2+eps, 0). The transport density blows up at (2,0) and is in L^p exactly
// for p < 3.

#include <cstddef>
#include <utility>
#include <vector>

#include "tdlab/fields.hpp"
#include "tdlab/raydensity.hpp"
#include "tdlab/vec2.hpp"

namespace tdlab {

/// Vertices of the source trapeze A, counterclockwise.
std::vector<Vec2> trapeze_vertices();

/// The triangle Delta_eps with vertices (0,0), (2+eps,0), (0,w(eps)).
std::vector<Vec2> delta_triangle(double eps);

/// The apex of the ray family, where the density is singular.
inline constexpr Vec2 kApex{2.0, 0.0};

/// w(eps) = 2 eps (2+eps) / (3 + 2 eps). Throws DomainError outside [0,1].
double w_of_eps(double eps);

/// w'(eps) = (12 + 12 eps + 4 eps^2) / (3 + 2 eps)^2 (quotient rule).
double w_prime(double eps);

/// Endpoints (0, w(eps)) and (2+eps, 0) of the ray l_eps.
std::pair<Vec2, Vec2> ray_of_eps(double eps);

/// (1-s)(2+eps, 0) + s(0, w(eps)).
Vec2 point_of_eps_s(double eps, double s);

struct MassBalance {
  double source = 0.0;  // f+(Delta_eps) by exact polygon clipping
  double target = 0.0;  // f-(Delta_eps) = eps
};
MassBalance mass_balance(double eps);

struct RayCoordinates {
  double eps = 0.0;
  double s = 0.0;
  std::size_t iterations = 0;
};

/// Inverse of point_of_eps_s on Delta_1: safeguarded Newton on
/// F(eps) = x1/(2+eps) + x2/w(eps) - 1, which is decreasing in eps.
/// Throws ApexDegenerate within 1e-12 of (2,0), DomainError outside Delta_1,
/// NoConvergence (with the last iterate) if the iteration stalls.
RayCoordinates eps_s_of_point(const Vec2& x);

/// T(x) = (2 + eps(x), 0).
Vec2 counterexample_map(const Vec2& x);

/// Jacobian determinant of (eps, t) -> point_of_eps_s(eps, t):
/// (1-t) w(eps) + t (2+eps) w'(eps).
double jacobian_J(double eps, double t);

/// Closed-form transport density at point_of_eps_s(eps, s):
/// |l_eps| * integral_{max(s, 1 - 1/(2+eps))}^1 J(eps,t) dt / J(eps,s).
/// Throws DomainError unless eps in (0,1] and s in [0,1].
double analytic_sigma(double eps, double s);

struct SigmaWindow {
  double c1 = 0.0;  // min of sigma * (s + eps)
  double c2 = 0.0;  // max of sigma * (s + eps)
  std::size_t samples = 0;
};
/// sigma(eps, s) * (s + eps) over an n x n grid of (0, eps0]^2.
SigmaWindow sigma_window(double eps0, std::size_t n);

/// Grid of cell size h covering [-0.25, 3.25] x [-0.25, 1.45], which holds
/// B((2,0), 0.2) and puts (2,0) on a cell corner when 2/h is an integer.
GridSpec counterexample_grid(double h);

/// Plan of the optimal map on the quadrature of the rasterized trapeze at
/// cell size source_h with the given subdivision.
MapPlan counterexample_plan(double source_h, std::size_t subdivision = 1);

/// Transport density of `plan` on counterexample_grid(h).
DensityField counterexample_sigma(const MapPlan& plan, double h, const ExecutionOptions& opts = {});

/// Exact area of the intersection of a disk with an axis-aligned box.
double disk_box_overlap(const Box& box, const Vec2& center, double radius);

/// sigma(B(center, radius)) with exact cell/disk overlap areas.
/// Throws OutOfGrid if the disk leaves the grid.
double ball_mass(const DensityField& sigma, const Vec2& center, double radius);

struct BallScaling {
  std::vector<double> r;
  std::vector<double> mass;  // sigma(B_{2r}) around (2,0)
  double slope = 0.0;        // least-squares slope of log mass vs log r
  double C = 0.0;            // exp(intercept): mass ~ C r^slope
};
BallScaling ball_scaling(const DensityField& sigma, const std::vector<double>& r_list);

/// Geometric sequence of n radii from r_lo to r_hi.
std::vector<double> geometric_radii(double r_lo, double r_hi, std::size_t n);

/// eps_r with l_{eps_r} tangent to B((2,0), r), i.e.
/// eps w / sqrt(w^2 + (2+eps)^2) = r. Throws DomainError if no root in [0,1].
double tangency_eps(double r);

/// Integral of sigma^p over Delta_1 restricted to s + eps >= cutoff.
double analytic_lp_power(double p, double cutoff);

/// Relative L1 error between deposited and analytic sigma over the cells lying
/// inside Delta_1 whose center has s + eps >= min_sum.
double analytic_discrepancy(const DensityField& sigma, double min_sum);

/// Largest cell value of sigma within distance rho of (2,0).
double max_near_apex(const DensityField& sigma, double rho);

enum class Verdict { kConvergent, kDivergent, kInconclusive };
const char* to_string(Verdict v);

struct LpStudyRow {
  double p = 0.0;
  double h = 0.0;
  double norm = 0.0;            // ||sigma_h||_p
  double power = 0.0;           // ||sigma_h||_p^p
  double analytic_power = 0.0;  // analytic_lp_power(p, sqrt(h)) (finite p < inf)
};

struct LpClassification {
  double p = 0.0;
  Verdict verdict = Verdict::kInconclusive;
  /// log2 of consecutive increment ratios of ||sigma_h||_p^p (the last one),
  /// i.e. the exponent a in power_h = A + B h^(-a).
  double growth_exponent = 0.0;
  /// log2 of the last raw refinement ratio of ||sigma_h||_p^p.
  double raw_exponent = 0.0;
  /// (p - 3) / 2: the exponent predicted by the effective cutoff sqrt(h).
  double predicted_exponent = 0.0;
  std::vector<double> relative_changes;  // of power_h between refinements
};

struct LpStudy {
  std::vector<LpStudyRow> rows;
  std::vector<LpClassification> classes;
};

/// Norms of deposited densities (one per cell size, h decreasing) for every
/// p, and a verdict per p: CONVERGENT if the last relative change of
/// power_h is at most 5%, DIVERGENT if every refinement grows it by at least
/// 15%, INCONCLUSIVE otherwise.
LpStudy lp_threshold_study(const std::vector<DensityField>& sigma_by_h, const std::vector<double>& p_list);

}  // namespace tdlab
