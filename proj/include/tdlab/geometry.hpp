#pragma once

// Planar domains with a Dirichlet boundary: convex polygons and "round
// polygons" (bounded components of the complement of equal-radius disks).
// Distances, nearest-point projections onto the boundary, the partition of a
// domain by nearest face, and round approximations of convex polygons.

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "tdlab/vec2.hpp"

namespace tdlab {

/// Absolute tolerance used for tie detection between faces.
inline constexpr double kTieTolerance = 1e-12;

struct Box {
  Vec2 lo;
  Vec2 hi;

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double diagonal() const { return (hi - lo).norm(); }
  bool contains(const Vec2& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  Box inflated(double d) const { return {lo - Vec2{d, d}, hi + Vec2{d, d}}; }
};

/// Counterclockwise, strictly convex polygon. Face i joins vertex i to i+1.
class ConvexPolygon {
 public:
  /// Throws InvalidDomain unless the chain is closed, strictly convex and CCW.
  explicit ConvexPolygon(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t face_count() const { return vertices_.size(); }
  Vec2 face_start(std::size_t i) const { return vertices_[i]; }
  Vec2 face_end(std::size_t i) const { return vertices_[(i + 1) % vertices_.size()]; }
  /// Unit normal of face i pointing out of the polygon.
  Vec2 outward_normal(std::size_t i) const;
  double area() const;
  double perimeter() const;
  bool contains(const Vec2& p) const;

 private:
  std::vector<Vec2> vertices_;
};

/// Circular arc of radius r around center `center`, swept counterclockwise
/// from angle `start` by `sweep` radians.
struct Arc {
  std::size_t center = 0;
  double start = 0.0;
  double sweep = 0.0;
  bool bounds_hole = false;  // true if the arc borders a bounded component
};

/// Union of the bounded components of R^2 minus the union of the closed disks
/// B(b_i, r). Centers whose circle contributes nothing to the boundary of a
/// bounded component are pruned at construction.
class RoundPolygon {
 public:
  /// Throws InvalidDomain if r <= 0 or no bounded component exists.
  RoundPolygon(std::vector<Vec2> centers, double radius);

  const std::vector<Vec2>& centers() const { return centers_; }
  double radius() const { return radius_; }

  /// Boundary faces (arcs of the bounded components).
  std::size_t face_count() const { return faces_.size(); }
  const Arc& face(std::size_t i) const { return arcs_[faces_[i]]; }
  Vec2 arc_point(const Arc& a, double angle) const;

  /// Every uncovered arc of every circle, including the outer ones.
  const std::vector<Arc>& all_arcs() const { return arcs_; }

  /// Index of the closest center and its distance; lowest index wins ties.
  std::pair<std::size_t, double> nearest_center(const Vec2& p) const;

  /// Closed-domain membership.
  bool contains(const Vec2& p) const;

  /// Distance from p to face i (as a point set).
  double distance_to_face(std::size_t i, const Vec2& p) const;

  /// Face of the arc on circle `center` containing `angle`, if any.
  std::optional<std::size_t> face_at(std::size_t center, double angle) const;

 private:
  void build_arcs();
  std::optional<std::size_t> arc_at(std::size_t center, double angle) const;

  std::vector<Vec2> centers_;
  double radius_;
  std::vector<Arc> arcs_;
  std::vector<std::size_t> faces_;                      // indices into arcs_
  std::vector<std::vector<std::size_t>> arcs_of_center_;  // indices into arcs_
  std::vector<std::size_t> face_of_arc_;                // arcs_ index -> face or npos
};

/// Immutable domain value; safe to share between threads.
class Domain {
 public:
  explicit Domain(ConvexPolygon polygon);
  explicit Domain(RoundPolygon round);

  bool is_polygon() const { return std::holds_alternative<ConvexPolygon>(shape_); }
  const ConvexPolygon& polygon() const { return std::get<ConvexPolygon>(shape_); }
  const RoundPolygon& round() const { return std::get<RoundPolygon>(shape_); }

  std::size_t face_count() const;
  double diameter() const { return diameter_; }
  const Box& bounds() const { return bounds_; }
  bool contains(const Vec2& p) const;

  /// Length of face i.
  double face_length(std::size_t i) const;
  /// Arclength coordinate of boundary point p along face i.
  double face_coordinate(std::size_t i, const Vec2& p) const;
  /// Point at arclength s along face i.
  Vec2 face_point(std::size_t i, double s) const;

 private:
  std::variant<ConvexPolygon, RoundPolygon> shape_;
  double diameter_ = 0.0;
  Box bounds_;
};

/// Result of a nearest-boundary query.
struct BoundaryPoint {
  Vec2 point;
  std::size_t face = 0;
  double distance = 0.0;
  /// True when another face attains the minimum within the tie tolerance.
  bool tie = false;
  /// Gap between the best and second-best face distances.
  double gap = 0.0;
};

/// Positive inside, negative outside, zero on the boundary. 1-Lipschitz.
double signed_distance(const Domain& domain, const Vec2& x);

/// Nearest boundary point with the lowest-index tie-break. Never throws.
BoundaryPoint nearest_boundary(const Domain& domain, const Vec2& x,
                               double tie_tolerance = kTieTolerance);

/// Nearest boundary point. Throws AmbiguousProjection when the argmin face
/// is not unique within 1e-12.
BoundaryPoint project_to_boundary(const Domain& domain, const Vec2& x);

/// Index i of the region Omega_i containing x (lowest index on seams).
std::size_t region_index(const Domain& domain, const Vec2& x);

double diameter(const Domain& domain);

/// Round polygon enclosing `polygon`, with disks of radius r centered on the
/// exterior offset curve at distance r, sampled with arclength step small
/// enough that the boundary sagitta stays below spacing^2 / (8 r).
/// Throws InvalidSpacing unless 0 < spacing < 2r.
RoundPolygon round_approximate(const ConvexPolygon& polygon, double r, double spacing);

/// Parameters t in [0,1] where the segment a + t (b - a) meets the boundary,
/// sorted, with near-duplicates (1e-12) merged.
std::vector<double> boundary_crossings(const Domain& domain, const Vec2& a, const Vec2& b);

/// Hausdorff distance between the boundaries of two domains, estimated from
/// boundary samples with spacing <= step.
double boundary_hausdorff(const Domain& a, const Domain& b, double step);

/// Absolute area of a simple polygon (shoelace formula).
double polygon_area(const std::vector<Vec2>& polygon);

/// Sutherland-Hodgman clip of `subject` by the convex CCW polygon `clip`.
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip);

/// Roughly uniform samples of the boundary with spacing <= step.
std::vector<Vec2> sample_boundary(const Domain& domain, double step);

}  // namespace tdlab
