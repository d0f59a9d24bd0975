#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tdlab/geometry.hpp"
#include "tdlab/vec2.hpp"

namespace tdlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Uniform cell-centered grid. Cell (i, j) covers
/// [origin.x + i h, origin.x + (i+1) h] x [origin.y + j h, origin.y + (j+1) h].
struct GridSpec {
  Vec2 origin;
  double h = 1.0;
  std::size_t nx = 1;
  std::size_t ny = 1;

  /// Throws std::invalid_argument on h <= 0 or an empty grid.
  void validate() const;

  /// Grid of cell size h covering `box`, origin snapped down to a multiple of h.
  static GridSpec covering(const Box& box, double h);

  std::size_t size() const { return nx * ny; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
  Vec2 cell_center(std::size_t i, std::size_t j) const {
    return origin + Vec2{(static_cast<double>(i) + 0.5) * h, (static_cast<double>(j) + 0.5) * h};
  }
  Box bounds() const {
    return {origin, origin + Vec2{static_cast<double>(nx) * h, static_cast<double>(ny) * h}};
  }
  double cell_area() const { return h * h; }
  /// Cell containing p (closed on the far edges), or nullopt outside.
  std::optional<std::pair<std::size_t, std::size_t>> cell_of(const Vec2& p) const;

  bool operator==(const GridSpec&) const = default;
};

/// Nonnegative (or signed, for divergence data) cell-centered density.
struct DensityField {
  GridSpec grid;
  std::vector<double> values;  // row-major, index j*nx + i

  DensityField() = default;
  explicit DensityField(const GridSpec& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

  double& at(std::size_t i, std::size_t j) { return values[grid.index(i, j)]; }
  double at(std::size_t i, std::size_t j) const { return values[grid.index(i, j)]; }
  double mass() const;
};

/// Point masses discretizing a density.
struct Quadrature {
  std::vector<Vec2> points;
  std::vector<double> weights;
  /// Area of the sub-cell each point represents; weight / sub_area is the
  /// density at the point.
  double sub_area = 0.0;

  std::size_t size() const { return points.size(); }
  double mass() const;
  double density(std::size_t k) const { return weights[k] / sub_area; }
};

/// Piecewise-constant linear density along boundary faces.
struct BoundaryMeasure {
  struct Face {
    std::size_t face = 0;
    double length = 0.0;
    double bin_width = 0.0;
    std::vector<double> mass;  // per bin
  };
  std::vector<Face> faces;
  std::size_t ties = 0;  // deposits resolved by the lowest-index rule

  double total_mass() const;
  double density(std::size_t face, std::size_t bin) const {
    return faces[face].mass[bin] / faces[face].bin_width;
  }
  double max_density() const;
};

/// Midpoint rule on each cell split subdivision x subdivision. Points with
/// zero weight are dropped; the represented mass is preserved exactly.
Quadrature quadrature_of(const DensityField& field, std::size_t subdivision = 3);

/// Quadrature of `value` times the indicator of a convex CCW polygon on the
/// lattice of squares of side d (corners at lattice_origin + multiples of d). Each square
/// clipped by the polygon carries value * (clipped area), at its center if
/// fully covered and at the centroid of the clipped piece otherwise, so all
/// points lie in the polygon and the mass is exact.
Quadrature clipped_quadrature(const std::vector<Vec2>& polygon, double value, double d,
                              const Vec2& lattice_origin = {0.0, 0.0});

/// Midpoint quadrature of `value` on the squares of side d whose centers lie
/// in `domain`.
Quadrature domain_quadrature(const Domain& domain, double value, double d);

/// Cell-average rasterization of `value` times the indicator of a convex
/// polygon (exact cell/polygon overlap areas).
DensityField rasterize_polygon(const GridSpec& grid, const std::vector<Vec2>& polygon,
                               double value = 1.0);

/// Indicator of an arbitrary domain sampled at ss x ss points per cell.
DensityField rasterize_domain(const GridSpec& grid, const Domain& domain, double value = 1.0,
                              std::size_t ss = 4);

/// (h^2 sum v^p)^(1/p) for finite p >= 1; max |v| for p = infinity.
double lp_norm(const DensityField& field, double p);

enum class PushforwardMode {
  /// Pointwise change of variables f-(T x) = f+(x) / J(x); each cell keeps
  /// the deposited mass over max(cell area, sampled image area).
  kDensity,
  /// Deposited mass divided by cell area; conserves mass exactly.
  kMass,
};

using PointMap = std::function<Vec2(const Vec2&)>;
using ScalarMap = std::function<double(const Vec2&)>;

/// Image of the quadrature under `map` binned onto `target`.
/// Throws SingularJacobian (density mode) or OutOfGrid.
DensityField pushforward_by_map(const Quadrature& q, const PointMap& map, const ScalarMap& jac,
                                const GridSpec& target, PushforwardMode mode);

/// ||T_# f+||_p evaluated through the change of variables
/// integral of f+^p / J^(p-1) at quadrature level.
double pushforward_lp_norm(const Quadrature& q, const ScalarMap& jac, double p);

/// Image of the quadrature under the boundary projection, binned in
/// arclength with bins no wider than bin_width.
BoundaryMeasure boundary_pushforward(const Quadrature& q, const Domain& domain, double bin_width);

// Serialization: CSV (x_index,y_index,value) plus a JSON header
// {origin, h, nx, ny}; boundary measures as CSV (face_id,s_start,s_end,density).
void write_density_csv(const DensityField& field, const std::string& csv_path,
                       const std::string& header_path);
DensityField read_density_csv(const std::string& csv_path, const std::string& header_path);
void write_boundary_csv(const BoundaryMeasure& measure, const std::string& path);

/// Shortest round-trip decimal representation used in all CSV output.
std::string format_double(double v);

}  // namespace tdlab
