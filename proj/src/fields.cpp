#include "tdlab/fields.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "tdlab/errors.hpp"

namespace tdlab {

void GridSpec::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid cell size must be positive");
  if (nx == 0 || ny == 0) throw std::invalid_argument("grid must have at least one cell per axis");
}

GridSpec GridSpec::covering(const Box& box, double h) {
  GridSpec g;
  g.h = h;
  g.origin = {std::floor(box.lo.x / h) * h, std::floor(box.lo.y / h) * h};
  g.nx = static_cast<std::size_t>(std::ceil((box.hi.x - g.origin.x) / h - 1e-9));
  g.ny = static_cast<std::size_t>(std::ceil((box.hi.y - g.origin.y) / h - 1e-9));
  g.nx = std::max<std::size_t>(g.nx, 1);
  g.ny = std::max<std::size_t>(g.ny, 1);
  return g;
}

std::optional<std::pair<std::size_t, std::size_t>> GridSpec::cell_of(const Vec2& p) const {
  const double fx = (p.x - origin.x) / h;
  const double fy = (p.y - origin.y) / h;
  const auto nxd = static_cast<double>(nx);
  const auto nyd = static_cast<double>(ny);
  if (!(fx >= 0.0 && fy >= 0.0 && fx <= nxd && fy <= nyd)) return std::nullopt;
  const auto i = std::min(static_cast<std::size_t>(fx), nx - 1);
  const auto j = std::min(static_cast<std::size_t>(fy), ny - 1);
  return std::make_pair(i, j);
}

double DensityField::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_area();
}

double Quadrature::mass() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double BoundaryMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& f : faces)
    for (double m : f.mass) s += m;
  return s;
}

double BoundaryMeasure::max_density() const {
  double best = 0.0;
  for (const auto& f : faces)
    for (double m : f.mass) best = std::max(best, m / f.bin_width);
  return best;
}

Quadrature quadrature_of(const DensityField& field, std::size_t subdivision) {
  if (subdivision == 0) throw std::invalid_argument("subdivision must be >= 1");
  const GridSpec& g = field.grid;
  const double hs = g.h / static_cast<double>(subdivision);
  Quadrature q;
  q.sub_area = hs * hs;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double v = field.at(i, j);
      if (v == 0.0) continue;
      if (v < 0.0) throw std::invalid_argument("quadrature of a negative density");
      const Vec2 base = g.origin + Vec2{static_cast<double>(i) * g.h, static_cast<double>(j) * g.h};
      for (std::size_t b = 0; b < subdivision; ++b) {
        for (std::size_t a = 0; a < subdivision; ++a) {
          q.points.push_back(base + Vec2{(static_cast<double>(a) + 0.5) * hs,
                                         (static_cast<double>(b) + 0.5) * hs});
          q.weights.push_back(v * q.sub_area);
        }
      }
    }
  }
  return q;
}

namespace {

Vec2 polygon_centroid(const std::vector<Vec2>& p) {
  double a = 0.0;
  Vec2 c{0.0, 0.0};
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Vec2& u = p[k];
    const Vec2& v = p[(k + 1) % p.size()];
    const double cr = cross(u, v);
    a += cr;
    c = c + (u + v) * cr;
  }
  return c * (1.0 / (3.0 * a));
}

// Sutherland-Hodgman clip of a polygon against an axis-aligned box.
std::vector<Vec2> clip_to_box(const std::vector<Vec2>& poly, const Box& b) {
  std::vector<Vec2> out = poly;
  auto clip = [&](auto inside, auto intersect) {
    std::vector<Vec2> in = std::move(out);
    out.clear();
    for (std::size_t k = 0; k < in.size(); ++k) {
      const Vec2& cur = in[k];
      const Vec2& prev = in[(k + in.size() - 1) % in.size()];
      const bool ci = inside(cur);
      const bool pi = inside(prev);
      if (ci) {
        if (!pi) out.push_back(intersect(prev, cur));
        out.push_back(cur);
      } else if (pi) {
        out.push_back(intersect(prev, cur));
      }
    }
  };
  auto at_x = [](double x) {
    return [x](const Vec2& p, const Vec2& q) { return Vec2{x, p.y + (q.y - p.y) * (x - p.x) / (q.x - p.x)}; };
  };
  auto at_y = [](double y) {
    return [y](const Vec2& p, const Vec2& q) { return Vec2{p.x + (q.x - p.x) * (y - p.y) / (q.y - p.y), y}; };
  };
  clip([&](const Vec2& p) { return p.x >= b.lo.x; }, at_x(b.lo.x));
  if (out.empty()) return out;
  clip([&](const Vec2& p) { return p.x <= b.hi.x; }, at_x(b.hi.x));
  if (out.empty()) return out;
  clip([&](const Vec2& p) { return p.y >= b.lo.y; }, at_y(b.lo.y));
  if (out.empty()) return out;
  clip([&](const Vec2& p) { return p.y <= b.hi.y; }, at_y(b.hi.y));
  return out;
}

}  // namespace

Quadrature clipped_quadrature(const std::vector<Vec2>& polygon, double value, double d, const Vec2& lattice_origin) {
  if (!(d > 0.0)) throw std::invalid_argument("quadrature spacing must be positive");
  Box b{polygon.front(), polygon.front()};
  for (const Vec2& v : polygon) {
    b.lo = {std::min(b.lo.x, v.x), std::min(b.lo.y, v.y)};
    b.hi = {std::max(b.hi.x, v.x), std::max(b.hi.y, v.y)};
  }
  const Vec2& o = lattice_origin;
  const auto i0 = static_cast<long>(std::floor((b.lo.x - o.x) / d));
  const auto j0 = static_cast<long>(std::floor((b.lo.y - o.y) / d));
  const auto i1 = static_cast<long>(std::ceil((b.hi.x - o.x) / d));
  const auto j1 = static_cast<long>(std::ceil((b.hi.y - o.y) / d));
  Quadrature q;
  q.sub_area = d * d;
  for (long j = j0; j < j1; ++j) {
    for (long i = i0; i < i1; ++i) {
      const double x0 = o.x + static_cast<double>(i) * d;
      const double y0 = o.y + static_cast<double>(j) * d;
      const std::vector<Vec2> cell{{x0, y0}, {x0 + d, y0}, {x0 + d, y0 + d}, {x0, y0 + d}};
      const auto piece = clip_convex(cell, polygon);
      if (piece.size() < 3) continue;
      const double a = polygon_area(piece);
      if (a <= 0.0) continue;
      q.points.push_back(a >= q.sub_area * (1.0 - 1e-12) ? Vec2{x0 + 0.5 * d, y0 + 0.5 * d} : polygon_centroid(piece));
      q.weights.push_back(value * a);
    }
  }
  return q;
}

Quadrature domain_quadrature(const Domain& domain, double value, double d) {
  if (!(d > 0.0)) throw std::invalid_argument("quadrature spacing must be positive");
  const Box& b = domain.bounds();
  const auto i0 = static_cast<long>(std::floor(b.lo.x / d));
  const auto j0 = static_cast<long>(std::floor(b.lo.y / d));
  const auto i1 = static_cast<long>(std::ceil(b.hi.x / d));
  const auto j1 = static_cast<long>(std::ceil(b.hi.y / d));
  Quadrature q;
  q.sub_area = d * d;
  for (long j = j0; j < j1; ++j) {
    for (long i = i0; i < i1; ++i) {
      const Vec2 c{(static_cast<double>(i) + 0.5) * d, (static_cast<double>(j) + 0.5) * d};
      if (!domain.contains(c)) continue;
      q.points.push_back(c);
      q.weights.push_back(value * q.sub_area);
    }
  }
  return q;
}

DensityField rasterize_polygon(const GridSpec& grid, const std::vector<Vec2>& polygon, double value) {
  grid.validate();
  DensityField f(grid);
  Box pb{polygon.front(), polygon.front()};
  for (const auto& p : polygon) {
    pb.lo = {std::min(pb.lo.x, p.x), std::min(pb.lo.y, p.y)};
    pb.hi = {std::max(pb.hi.x, p.x), std::max(pb.hi.y, p.y)};
  }
  auto lo_idx = [&](double v, double o, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(std::floor((v - o) / grid.h), 0.0, static_cast<double>(n - 1)));
  };
  const std::size_t i0 = lo_idx(pb.lo.x, grid.origin.x, grid.nx);
  const std::size_t i1 = lo_idx(pb.hi.x, grid.origin.x, grid.nx);
  const std::size_t j0 = lo_idx(pb.lo.y, grid.origin.y, grid.ny);
  const std::size_t j1 = lo_idx(pb.hi.y, grid.origin.y, grid.ny);
  const double area = grid.cell_area();
  for (std::size_t j = j0; j <= j1; ++j) {
    for (std::size_t i = i0; i <= i1; ++i) {
      const Vec2 lo = grid.origin + Vec2{static_cast<double>(i) * grid.h, static_cast<double>(j) * grid.h};
      const auto clipped = clip_to_box(polygon, {lo, lo + Vec2{grid.h, grid.h}});
      if (clipped.size() >= 3) f.at(i, j) = value * polygon_area(clipped) / area;
    }
  }
  return f;
}

DensityField rasterize_domain(const GridSpec& grid, const Domain& domain, double value, std::size_t ss) {
  grid.validate();
  if (domain.is_polygon()) return rasterize_polygon(grid, domain.polygon().vertices(), value);
  DensityField f(grid);
  const double hs = grid.h / static_cast<double>(ss);
  const Box db = domain.bounds();
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const Vec2 lo = grid.origin + Vec2{static_cast<double>(i) * grid.h, static_cast<double>(j) * grid.h};
      if (lo.x > db.hi.x || lo.y > db.hi.y || lo.x + grid.h < db.lo.x || lo.y + grid.h < db.lo.y) continue;
      std::size_t hits = 0;
      for (std::size_t b = 0; b < ss; ++b)
        for (std::size_t a = 0; a < ss; ++a)
          if (domain.contains(lo + Vec2{(a + 0.5) * hs, (b + 0.5) * hs})) ++hits;
      f.at(i, j) = value * static_cast<double>(hits) / static_cast<double>(ss * ss);
    }
  }
  return f;
}

double lp_norm(const DensityField& field, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : field.values) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm requires p >= 1");
  double s = 0.0;
  for (double v : field.values) s += std::pow(std::abs(v), p);
  return std::pow(s * field.grid.cell_area(), 1.0 / p);
}

DensityField pushforward_by_map(const Quadrature& q, const PointMap& map, const ScalarMap& jac,
                                const GridSpec& target, PushforwardMode mode) {
  target.validate();
  DensityField mass(target);
  std::vector<double> image_area(mode == PushforwardMode::kDensity ? target.size() : 0, 0.0);
  for (std::size_t k = 0; k < q.size(); ++k) {
    const Vec2 y = map(q.points[k]);
    const auto cell = target.cell_of(y);
    if (!cell) throw OutOfGrid(k, "image of quadrature point");
    const std::size_t idx = target.index(cell->first, cell->second);
    mass.values[idx] += q.weights[k];
    if (mode == PushforwardMode::kDensity) {
      const double j = jac(q.points[k]);
      if (!(j > 1e-14))
        throw SingularJacobian("Jacobian " + std::to_string(j) + " at quadrature point " + std::to_string(k));
      // f-(y) a_k = w_k with a_k the image area of the sub-cell.
      image_area[idx] += q.sub_area * j;
    }
  }
  const double area = target.cell_area();
  for (std::size_t idx = 0; idx < target.size(); ++idx) {
    const double denom = mode == PushforwardMode::kDensity ? std::max(area, image_area[idx]) : area;
    mass.values[idx] /= denom;
  }
  return mass;
}

double pushforward_lp_norm(const Quadrature& q, const ScalarMap& jac, double p) {
  double acc = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double j = jac(q.points[k]);
    if (!(j > 1e-14)) throw SingularJacobian("Jacobian vanishes at quadrature point " + std::to_string(k));
    const double f = q.density(k);
    if (std::isinf(p)) {
      acc = std::max(acc, f / j);
    } else {
      acc += q.sub_area * std::pow(f, p) / std::pow(j, p - 1.0);
    }
  }
  return std::isinf(p) ? acc : std::pow(acc, 1.0 / p);
}

BoundaryMeasure boundary_pushforward(const Quadrature& q, const Domain& domain, double bin_width) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
  BoundaryMeasure m;
  for (std::size_t f = 0; f < domain.face_count(); ++f) {
    BoundaryMeasure::Face face;
    face.face = f;
    face.length = domain.face_length(f);
    const auto bins = static_cast<std::size_t>(std::max(1.0, std::ceil(face.length / bin_width - 1e-9)));
    face.bin_width = face.length / static_cast<double>(bins);
    face.mass.assign(bins, 0.0);
    m.faces.push_back(std::move(face));
  }
  for (std::size_t k = 0; k < q.size(); ++k) {
    const BoundaryPoint bp = nearest_boundary(domain, q.points[k]);
    if (bp.tie) ++m.ties;
    auto& face = m.faces[bp.face];
    const double s = domain.face_coordinate(bp.face, bp.point);
    const auto bin = std::min(face.mass.size() - 1, static_cast<std::size_t>(s / face.bin_width));
    face.mass[bin] += q.weights[k];
  }
  return m;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_density_csv(const DensityField& field, const std::string& csv_path,
                       const std::string& header_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write " + csv_path);
  out << "x_index,y_index,value\n";
  for (std::size_t j = 0; j < field.grid.ny; ++j)
    for (std::size_t i = 0; i < field.grid.nx; ++i)
      out << i << ',' << j << ',' << format_double(field.at(i, j)) << '\n';

  nlohmann::ordered_json hdr;
  hdr["origin"] = {field.grid.origin.x, field.grid.origin.y};
  hdr["h"] = field.grid.h;
  hdr["nx"] = field.grid.nx;
  hdr["ny"] = field.grid.ny;
  std::ofstream hout(header_path);
  if (!hout) throw std::runtime_error("cannot write " + header_path);
  hout << hdr.dump(2) << '\n';
}

DensityField read_density_csv(const std::string& csv_path, const std::string& header_path) {
  std::ifstream hin(header_path);
  if (!hin) throw std::runtime_error("cannot read " + header_path);
  const auto hdr = nlohmann::json::parse(hin);
  GridSpec g;
  g.origin = {hdr.at("origin").at(0).get<double>(), hdr.at("origin").at(1).get<double>()};
  g.h = hdr.at("h").get<double>();
  g.nx = hdr.at("nx").get<std::size_t>();
  g.ny = hdr.at("ny").get<std::size_t>();
  g.validate();
  DensityField f(g);
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot read " + csv_path);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t i = 0, j = 0;
    double v = 0.0;
    char c1 = 0, c2 = 0;
    ls >> i >> c1 >> j >> c2 >> v;
    if (!ls || c1 != ',' || c2 != ',' || i >= g.nx || j >= g.ny)
      throw std::runtime_error("malformed density row: " + line);
    f.at(i, j) = v;
  }
  return f;
}

void write_boundary_csv(const BoundaryMeasure& measure, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "face_id,s_start,s_end,density\n";
  for (const auto& f : measure.faces) {
    for (std::size_t b = 0; b < f.mass.size(); ++b) {
      out << f.face << ',' << format_double(f.bin_width * b) << ',' << format_double(f.bin_width * (b + 1))
          << ',' << format_double(f.mass[b] / f.bin_width) << '\n';
    }
  }
}

}  // namespace tdlab
