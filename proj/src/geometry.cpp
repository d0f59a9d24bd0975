#include "tdlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tdlab/errors.hpp"

namespace tdlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

// Angular offset of `angle` from the arc start, in [0, 2pi).
double arc_offset(const Arc& arc, double angle) { return wrap_angle(angle - arc.start); }

bool arc_contains(const Arc& arc, double angle, double tol = 1e-12) {
  if (arc.sweep >= kTwoPi) return true;
  const double off = arc_offset(arc, angle);
  return off <= arc.sweep + tol || off >= kTwoPi - tol;
}

// Monotone chain hull; returns hull vertices in CCW order.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Vec2& a, const Vec2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    const Vec2& p = pts[i];
    while (k >= t && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

double max_pairwise_distance(const std::vector<Vec2>& pts) {
  const auto hull = convex_hull(pts);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, distance(hull[i], hull[j]));
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConvexPolygon

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n >= 2 && vertices_.front() == vertices_.back()) {
    vertices_.pop_back();  // explicitly closed chain
  }
  if (vertices_.size() < 3) throw InvalidDomain("polygon needs at least 3 distinct vertices");
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % vertices_.size()];
    const Vec2& c = vertices_[(i + 2) % vertices_.size()];
    if (!std::isfinite(a.x) || !std::isfinite(a.y)) throw InvalidDomain("non-finite vertex");
    if (a == b) throw InvalidDomain("repeated vertex " + std::to_string(i));
    if (cross(b - a, c - b) <= 0.0)
      throw InvalidDomain("polygon is not strictly convex counterclockwise at vertex " +
                          std::to_string((i + 1) % vertices_.size()));
  }
  // A strictly left-turning chain can still wind more than once.
  double turning = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Vec2 e0 = face_end(i) - face_start(i);
    const Vec2 e1 = face_end((i + 1) % vertices_.size()) - face_start((i + 1) % vertices_.size());
    turning += std::atan2(cross(e0, e1), dot(e0, e1));
  }
  if (std::abs(turning - kTwoPi) > 1e-6) throw InvalidDomain("polygon winds more than once");
}

Vec2 ConvexPolygon::outward_normal(std::size_t i) const {
  const Vec2 e = face_end(i) - face_start(i);
  return Vec2{e.y, -e.x} / e.norm();
}

double ConvexPolygon::area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) a += cross(face_start(i), face_end(i));
  return 0.5 * a;
}

double ConvexPolygon::perimeter() const {
  double p = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) p += distance(face_start(i), face_end(i));
  return p;
}

bool ConvexPolygon::contains(const Vec2& p) const {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (cross(face_end(i) - face_start(i), p - face_start(i)) < 0.0) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// RoundPolygon

RoundPolygon::RoundPolygon(std::vector<Vec2> centers, double radius) : radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidDomain("radius must be positive");
  for (const auto& c : centers) {
    if (!std::isfinite(c.x) || !std::isfinite(c.y)) throw InvalidDomain("non-finite center");
    const bool dup = std::any_of(centers_.begin(), centers_.end(),
                                 [&](const Vec2& o) { return distance(o, c) <= 1e-12 * radius; });
    if (!dup) centers_.push_back(c);
  }
  if (centers_.size() < 2) throw InvalidDomain("round polygon needs at least two disks");
  build_arcs();

  std::vector<bool> active(centers_.size(), false);
  for (const auto& a : arcs_)
    if (a.bounds_hole) active[a.center] = true;
  if (std::none_of(active.begin(), active.end(), [](bool b) { return b; }))
    throw InvalidDomain("the disk union does not enclose a bounded component");
  if (std::find(active.begin(), active.end(), false) != active.end()) {
    std::vector<Vec2> kept;
    for (std::size_t i = 0; i < centers_.size(); ++i)
      if (active[i]) kept.push_back(centers_[i]);
    const std::size_t holes_before = faces_.size();
    centers_ = std::move(kept);
    build_arcs();
    if (faces_.size() != holes_before)
      throw InvalidDomain("pruning inactive disks changed the bounded components");
  }
}

void RoundPolygon::build_arcs() {
  const double r = radius_;
  const std::size_t n = centers_.size();
  arcs_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, double>> covered;  // [start, end] within [0, 2pi]
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vec2 d = centers_[j] - centers_[i];
      const double dist = d.norm();
      if (dist >= 2.0 * r) continue;
      const double alpha = std::acos(dist / (2.0 * r));
      const double s = wrap_angle(std::atan2(d.y, d.x) - alpha);
      const double e = s + 2.0 * alpha;
      if (e <= kTwoPi) {
        covered.emplace_back(s, e);
      } else {
        covered.emplace_back(s, kTwoPi);
        covered.emplace_back(0.0, e - kTwoPi);
      }
    }
    if (covered.empty()) {
      arcs_.push_back({i, 0.0, kTwoPi, false});
      continue;
    }
    std::sort(covered.begin(), covered.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& iv : covered) {
      if (!merged.empty() && iv.first <= merged.back().second) {
        merged.back().second = std::max(merged.back().second, iv.second);
      } else {
        merged.push_back(iv);
      }
    }
    for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
      const double gap = merged[k + 1].first - merged[k].second;
      if (gap > 1e-14) arcs_.push_back({i, merged[k].second, gap, false});
    }
    const double wrap_gap = (merged.front().first + kTwoPi) - merged.back().second;
    if (wrap_gap > 1e-14) arcs_.push_back({i, wrap_angle(merged.back().second), wrap_gap, false});
  }

  // Link each arc's end to the arc starting at the same point; each closed
  // chain is one boundary curve of the disk union.
  const std::size_t m = arcs_.size();
  std::vector<std::size_t> next(m, kNone);
  std::vector<int> preds(m, 0);
  for (std::size_t a = 0; a < m; ++a) {
    if (arcs_[a].sweep >= kTwoPi) {
      next[a] = a;
      ++preds[a];
      continue;
    }
    const Vec2 end = arc_point(arcs_[a], arcs_[a].start + arcs_[a].sweep);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < m; ++b) {
      if (arcs_[b].center == arcs_[a].center || arcs_[b].sweep >= kTwoPi) continue;
      const double dd = distance(end, arc_point(arcs_[b], arcs_[b].start));
      if (dd < best) {
        best = dd;
        next[a] = b;
      }
    }
    if (next[a] == kNone || best > 1e-7 * r)
      throw InvalidDomain("degenerate disk arrangement: open boundary chain");
    ++preds[next[a]];
  }
  if (std::any_of(preds.begin(), preds.end(), [](int p) { return p != 1; }))
    throw InvalidDomain("degenerate disk arrangement: ambiguous boundary chain");

  std::vector<bool> seen(m, false);
  for (std::size_t a0 = 0; a0 < m; ++a0) {
    if (seen[a0]) continue;
    std::vector<std::size_t> cycle;
    double area = 0.0;
    for (std::size_t a = a0; !seen[a]; a = next[a]) {
      seen[a] = true;
      cycle.push_back(a);
      const Arc& arc = arcs_[a];
      const Vec2& c = centers_[arc.center];
      const double t0 = arc.start;
      const double t1 = arc.start + arc.sweep;
      area += 0.5 * (r * r * arc.sweep +
                     r * (c.x * (std::sin(t1) - std::sin(t0)) - c.y * (std::cos(t1) - std::cos(t0))));
    }
    // Arcs run counterclockwise around their disks, so a bounded complement
    // component is traversed clockwise.
    if (area < 0.0)
      for (std::size_t a : cycle) arcs_[a].bounds_hole = true;
  }

  faces_.clear();
  arcs_of_center_.assign(n, {});
  face_of_arc_.assign(m, kNone);
  for (std::size_t a = 0; a < m; ++a) {
    arcs_of_center_[arcs_[a].center].push_back(a);
    if (arcs_[a].bounds_hole) {
      face_of_arc_[a] = faces_.size();
      faces_.push_back(a);
    }
  }
}

Vec2 RoundPolygon::arc_point(const Arc& a, double angle) const {
  return centers_[a.center] + Vec2{std::cos(angle), std::sin(angle)} * radius_;
}

std::pair<std::size_t, double> RoundPolygon::nearest_center(const Vec2& p) const {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    const double d = distance(p, centers_[i]);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return {best, bd};
}

std::optional<std::size_t> RoundPolygon::arc_at(std::size_t center, double angle) const {
  const auto& list = arcs_of_center_[center];
  if (list.empty()) return std::nullopt;
  for (std::size_t a : list)
    if (arc_contains(arcs_[a], angle)) return a;
  // Angle sits in a covered gap by rounding: take the arc with the nearest end.
  std::size_t best = list.front();
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t a : list) {
    const double off = arc_offset(arcs_[a], angle);
    const double d = std::min(std::abs(off - arcs_[a].sweep), kTwoPi - off);
    if (d < bd) {
      bd = d;
      best = a;
    }
  }
  if (bd > 1e-9) return std::nullopt;
  return best;
}

std::optional<std::size_t> RoundPolygon::face_at(std::size_t center, double angle) const {
  const auto a = arc_at(center, angle);
  if (!a || face_of_arc_[*a] == kNone) return std::nullopt;
  return face_of_arc_[*a];
}

bool RoundPolygon::contains(const Vec2& p) const {
  const auto [i, d] = nearest_center(p);
  if (d < radius_ - 1e-12) return false;
  const Vec2 v = p - centers_[i];
  const auto a = arc_at(i, std::atan2(v.y, v.x));
  return a && arcs_[*a].bounds_hole;
}

double RoundPolygon::distance_to_face(std::size_t i, const Vec2& p) const {
  const Arc& arc = face(i);
  const Vec2 v = p - centers_[arc.center];
  const double rho = v.norm();
  if (rho == 0.0) return radius_;
  if (arc_contains(arc, std::atan2(v.y, v.x), 0.0)) return std::abs(rho - radius_);
  return std::min(distance(p, arc_point(arc, arc.start)),
                  distance(p, arc_point(arc, arc.start + arc.sweep)));
}

// ---------------------------------------------------------------------------
// Domain

namespace {

std::vector<Vec2> round_face_samples(const RoundPolygon& rp, int per_face) {
  std::vector<Vec2> pts;
  for (std::size_t f = 0; f < rp.face_count(); ++f) {
    const Arc& a = rp.face(f);
    for (int k = 0; k <= per_face; ++k) pts.push_back(rp.arc_point(a, a.start + a.sweep * k / per_face));
    for (int q = 0; q < 4; ++q) {
      const double ang = q * std::numbers::pi / 2.0;
      if (arc_contains(a, ang, 0.0)) pts.push_back(rp.arc_point(a, ang));
    }
  }
  return pts;
}

Box box_of(const std::vector<Vec2>& pts) {
  Box b{pts.front(), pts.front()};
  for (const auto& p : pts) {
    b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y)};
    b.hi = {std::max(b.hi.x, p.x), std::max(b.hi.y, p.y)};
  }
  return b;
}

void check_extent(const Box& b) {
  if (b.diagonal() > 10.0 + 1e-9)
    throw InvalidDomain("domain bounding-box diagonal exceeds 10; rescale the input");
}

}  // namespace

Domain::Domain(ConvexPolygon polygon) : shape_(std::move(polygon)) {
  const auto& v = this->polygon().vertices();
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) diameter_ = std::max(diameter_, distance(v[i], v[j]));
  bounds_ = box_of(v);
  check_extent(bounds_);
}

Domain::Domain(RoundPolygon round) : shape_(std::move(round)) {
  const auto pts = round_face_samples(this->round(), 64);
  diameter_ = max_pairwise_distance(pts);
  bounds_ = box_of(pts);
  check_extent(bounds_);
}

std::size_t Domain::face_count() const {
  return is_polygon() ? polygon().face_count() : round().face_count();
}

bool Domain::contains(const Vec2& p) const {
  return is_polygon() ? polygon().contains(p) : round().contains(p);
}

double Domain::face_length(std::size_t i) const {
  if (is_polygon()) return distance(polygon().face_start(i), polygon().face_end(i));
  return round().radius() * round().face(i).sweep;
}

double Domain::face_coordinate(std::size_t i, const Vec2& p) const {
  if (is_polygon()) {
    const Vec2 a = polygon().face_start(i);
    const Vec2 e = polygon().face_end(i) - a;
    const double len = e.norm();
    return std::clamp(dot(p - a, e) / len, 0.0, len);
  }
  const auto& rp = round();
  const Arc& arc = rp.face(i);
  const Vec2 v = p - rp.centers()[arc.center];
  double off = arc_offset(arc, std::atan2(v.y, v.x));
  if (off > arc.sweep) off = (off - arc.sweep < kTwoPi - off) ? arc.sweep : 0.0;
  return rp.radius() * off;
}

Vec2 Domain::face_point(std::size_t i, double s) const {
  if (is_polygon()) {
    const Vec2 a = polygon().face_start(i);
    const Vec2 e = polygon().face_end(i) - a;
    return a + e * (s / e.norm());
  }
  const auto& rp = round();
  const Arc& arc = rp.face(i);
  return rp.arc_point(arc, arc.start + s / rp.radius());
}

// ---------------------------------------------------------------------------
// Queries

double signed_distance(const Domain& domain, const Vec2& x) {
  if (domain.is_polygon()) {
    const auto& poly = domain.polygon();
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.face_count(); ++i)
      d = std::min(d, distance(x, closest_on_segment(poly.face_start(i), poly.face_end(i), x)));
    return poly.contains(x) ? d : -d;
  }
  const auto& rp = domain.round();
  if (rp.contains(x)) return std::max(0.0, rp.nearest_center(x).second - rp.radius());
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < rp.face_count(); ++f) d = std::min(d, rp.distance_to_face(f, x));
  return -d;
}

namespace {

// Picks the lowest-index candidate within `tol` of the minimum distance.
template <typename DistFn>
void rank_faces(std::size_t count, DistFn dist, double tol, BoundaryPoint& out) {
  std::vector<double> d(count);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    d[i] = dist(i);
    best = std::min(best, d[i]);
  }
  std::size_t chosen = kNone;
  std::size_t ties = 0;
  double second = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    if (d[i] <= best + tol) {
      ++ties;
      if (chosen == kNone) chosen = i;
    }
  }
  for (std::size_t i = 0; i < count; ++i)
    if (i != chosen) second = std::min(second, d[i]);
  out.face = chosen;
  out.distance = d[chosen];
  out.tie = ties > 1;
  out.gap = second - d[chosen];
}

}  // namespace

BoundaryPoint nearest_boundary(const Domain& domain, const Vec2& x, double tie_tolerance) {
  BoundaryPoint bp;
  if (domain.is_polygon()) {
    const auto& poly = domain.polygon();
    rank_faces(
        poly.face_count(),
        [&](std::size_t i) {
          return distance(x, closest_on_segment(poly.face_start(i), poly.face_end(i), x));
        },
        tie_tolerance, bp);
    bp.point = closest_on_segment(poly.face_start(bp.face), poly.face_end(bp.face), x);
    return bp;
  }

  const auto& rp = domain.round();
  if (rp.contains(x)) {
    // Inside: the nearest boundary point lies on the nearest circle, along
    // the ray from its center.
    const auto& cs = rp.centers();
    BoundaryPoint by_center;
    rank_faces(cs.size(), [&](std::size_t i) { return distance(x, cs[i]); }, tie_tolerance,
               by_center);
    const std::size_t c = by_center.face;
    const Vec2 v = x - cs[c];
    const double rho = v.norm();
    if (rho <= 1e-14) throw DegenerateCenter("point coincides with a disk center");
    bp.point = cs[c] + v * (rp.radius() / rho);
    bp.distance = rho - rp.radius();
    bp.tie = by_center.tie;
    bp.gap = by_center.gap;
    const auto f = rp.face_at(c, std::atan2(v.y, v.x));
    if (f) {
      bp.face = *f;
    } else {
      // Boundary rounding at a vertex: fall back to the nearest face.
      BoundaryPoint tmp;
      rank_faces(rp.face_count(), [&](std::size_t i) { return rp.distance_to_face(i, x); },
                 tie_tolerance, tmp);
      bp.face = tmp.face;
    }
    return bp;
  }

  rank_faces(rp.face_count(), [&](std::size_t i) { return rp.distance_to_face(i, x); },
             tie_tolerance, bp);
  const Arc& arc = rp.face(bp.face);
  const Vec2 v = x - rp.centers()[arc.center];
  const double ang = std::atan2(v.y, v.x);
  if (v.norm() > 0.0 && arc_contains(arc, ang, 0.0)) {
    bp.point = rp.arc_point(arc, ang);
  } else {
    const Vec2 p0 = rp.arc_point(arc, arc.start);
    const Vec2 p1 = rp.arc_point(arc, arc.start + arc.sweep);
    bp.point = distance(x, p0) <= distance(x, p1) ? p0 : p1;
  }
  return bp;
}

BoundaryPoint project_to_boundary(const Domain& domain, const Vec2& x) {
  BoundaryPoint bp = nearest_boundary(domain, x);
  if (bp.tie) {
    // Identify the competing face for the error message.
    std::size_t other = bp.face;
    const BoundaryPoint loose = nearest_boundary(domain, x, 0.0);
    if (loose.face != bp.face) other = loose.face;
    if (other == bp.face) {
      for (std::size_t i = 0; i < domain.face_count(); ++i) {
        if (i == bp.face) continue;
        other = i;
        break;
      }
    }
    throw AmbiguousProjection(bp.face, other);
  }
  return bp;
}

std::size_t region_index(const Domain& domain, const Vec2& x) {
  return nearest_boundary(domain, x).face;
}

double diameter(const Domain& domain) { return domain.diameter(); }

RoundPolygon round_approximate(const ConvexPolygon& polygon, double r, double spacing) {
  if (!(r > 0.0)) throw InvalidSpacing("radius must be positive");
  if (!(spacing > 0.0) || spacing >= 2.0 * r)
    throw InvalidSpacing("spacing must lie in (0, 2r) so that adjacent disks overlap");

  // Offset curve: each edge shifted outward by r, joined by arcs of radius r
  // around the vertices.
  struct Piece {
    bool is_arc;
    Vec2 a, b;        // segment endpoints
    Vec2 c;           // arc center
    double t0, sweep; // arc angles
    double length;
  };
  const std::size_t n = polygon.face_count();
  std::vector<Piece> pieces;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 nrm = polygon.outward_normal(i);
    const Vec2 a = polygon.face_start(i) + nrm * r;
    const Vec2 b = polygon.face_end(i) + nrm * r;
    pieces.push_back({false, a, b, {}, 0.0, 0.0, distance(a, b)});
    const Vec2 nrm2 = polygon.outward_normal((i + 1) % n);
    const double t0 = std::atan2(nrm.y, nrm.x);
    const double sweep = wrap_angle(std::atan2(nrm2.y, nrm2.x) - t0);
    pieces.push_back({true, {}, {}, polygon.face_end(i), t0, sweep, r * sweep});
    total += pieces[pieces.size() - 2].length + pieces.back().length;
  }

  // Largest chord whose sagitta r - sqrt(r^2 - c^2/4) stays below spacing^2/(8r).
  const double t = spacing * spacing / (8.0 * r);
  const double chord = 2.0 * std::sqrt(2.0 * r * t - t * t);
  const auto count = static_cast<std::size_t>(std::ceil(total / chord));
  const double step = total / static_cast<double>(count);

  std::vector<Vec2> centers;
  centers.reserve(count);
  std::size_t piece = 0;
  double piece_start = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = step * static_cast<double>(k);
    while (piece + 1 < pieces.size() && s > piece_start + pieces[piece].length) {
      piece_start += pieces[piece].length;
      ++piece;
    }
    const Piece& p = pieces[piece];
    const double u = p.length > 0.0 ? std::clamp((s - piece_start) / p.length, 0.0, 1.0) : 0.0;
    if (p.is_arc) {
      const double ang = p.t0 + u * p.sweep;
      centers.push_back(p.c + Vec2{std::cos(ang), std::sin(ang)} * r);
    } else {
      centers.push_back(p.a + (p.b - p.a) * u);
    }
  }
  return RoundPolygon(std::move(centers), r);
}

std::vector<double> boundary_crossings(const Domain& domain, const Vec2& a, const Vec2& b) {
  std::vector<double> ts;
  const Vec2 dv = b - a;
  constexpr double eps = 1e-12;
  if (domain.is_polygon()) {
    const auto& poly = domain.polygon();
    for (std::size_t i = 0; i < poly.face_count(); ++i) {
      const Vec2 c = poly.face_start(i);
      const Vec2 e = poly.face_end(i) - c;
      const double den = cross(dv, e);
      if (std::abs(den) < 1e-300) continue;
      const double t = cross(c - a, e) / den;
      const double u = cross(c - a, dv) / den;
      if (t >= -eps && t <= 1.0 + eps && u >= -eps && u <= 1.0 + eps)
        ts.push_back(std::clamp(t, 0.0, 1.0));
    }
  } else {
    const auto& rp = domain.round();
    const double r = rp.radius();
    for (std::size_t f = 0; f < rp.face_count(); ++f) {
      const Arc& arc = rp.face(f);
      const Vec2 w = a - rp.centers()[arc.center];
      const double A = dv.norm2();
      const double B = 2.0 * dot(dv, w);
      const double C = w.norm2() - r * r;
      const double disc = B * B - 4.0 * A * C;
      if (A == 0.0 || disc < 0.0) continue;
      const double sq = std::sqrt(disc);
      for (double t : {(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)}) {
        if (t < -eps || t > 1.0 + eps) continue;
        const Vec2 p = w + dv * t;
        if (arc_contains(arc, std::atan2(p.y, p.x), 1e-9)) ts.push_back(std::clamp(t, 0.0, 1.0));
      }
    }
  }
  std::sort(ts.begin(), ts.end());
  const double len = dv.norm();
  std::vector<double> out;
  for (double t : ts)
    if (out.empty() || (t - out.back()) * len > 1e-9) out.push_back(t);
  return out;
}

double boundary_hausdorff(const Domain& a, const Domain& b, double step) {
  double d = 0.0;
  for (const Vec2& p : sample_boundary(a, step)) d = std::max(d, std::abs(signed_distance(b, p)));
  for (const Vec2& p : sample_boundary(b, step)) d = std::max(d, std::abs(signed_distance(a, p)));
  return d;
}

double polygon_area(const std::vector<Vec2>& polygon) {
  double a = 0.0;
  for (std::size_t k = 0; k < polygon.size(); ++k) a += cross(polygon[k], polygon[(k + 1) % polygon.size()]);
  return 0.5 * std::abs(a);
}

std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip) {
  std::vector<Vec2> out = subject;
  for (std::size_t e = 0; e < clip.size() && !out.empty(); ++e) {
    const Vec2 a = clip[e];
    const Vec2 b = clip[(e + 1) % clip.size()];
    auto side = [&](const Vec2& p) { return cross(b - a, p - a); };
    std::vector<Vec2> in = std::move(out);
    out.clear();
    for (std::size_t k = 0; k < in.size(); ++k) {
      const Vec2& cur = in[k];
      const Vec2& prev = in[(k + in.size() - 1) % in.size()];
      const double sc = side(cur);
      const double sp = side(prev);
      if (sc >= 0.0) {
        if (sp < 0.0) out.push_back(prev + (cur - prev) * (sp / (sp - sc)));
        out.push_back(cur);
      } else if (sp >= 0.0) {
        out.push_back(prev + (cur - prev) * (sp / (sp - sc)));
      }
    }
  }
  return out;
}

std::vector<Vec2> sample_boundary(const Domain& domain, double step) {
  std::vector<Vec2> pts;
  for (std::size_t f = 0; f < domain.face_count(); ++f) {
    const double len = domain.face_length(f);
    const auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(len / step)));
    for (std::size_t j = 0; j <= k; ++j) pts.push_back(domain.face_point(f, len * j / k));
  }
  return pts;
}

}  // namespace tdlab
