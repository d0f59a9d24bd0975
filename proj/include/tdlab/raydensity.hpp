#pragma once

// Map-induced transport plans and their transport densities
// sigma(A) = sum_k w_k * length(A intersected with [x_k, T x_k]),
// deposited by exact segment/cell clipping.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "tdlab/fields.hpp"
#include "tdlab/geometry.hpp"

namespace tdlab {

/// gamma = (id, T)_# f+ at quadrature level; destinations are frozen.
struct MapPlan {
  Quadrature source;
  std::vector<Vec2> dest;

  std::size_t size() const { return dest.size(); }
};

/// Scalar potential with a claimed Lipschitz constant.
struct Potential {
  std::function<double(const Vec2&)> eval;
  double lip = 1.0;
};

struct ExecutionOptions {
  /// Serial accumulation in index order (bit-stable output).
  bool deterministic = true;
  /// Worker threads when not deterministic; 0 means worker_count().
  std::size_t workers = 0;
};

/// Worker count from TDLAB_WORKERS, else the hardware concurrency.
std::size_t worker_count();

/// Evaluates `map` once per quadrature point. Failures are rethrown as
/// MapError carrying the point index.
MapPlan plan_from_map(const Quadrature& q, const PointMap& map);

/// Transport density (mass / area) of the plan on `grid`.
/// Throws OutOfGrid with the index of the first segment leaving the grid.
DensityField deposit_transport_density(const MapPlan& plan, const GridSpec& grid,
                                       const ExecutionOptions& opts = {});

/// Sum of w_k |x_k - y_k|.
double transport_cost(const MapPlan& plan);

struct LipschitzCheck {
  double max_ratio = 0.0;  // largest |u(a)-u(b)| / |a-b| observed
  std::size_t pairs = 0;
};

/// Empirical Lipschitz ratio over the plan's segment endpoints and `samples`
/// random pairs drawn from the plan's bounding box.
LipschitzCheck check_lipschitz(const Potential& u, const MapPlan& plan, std::size_t samples = 100000,
                               std::uint64_t seed = 7);

/// transport_cost - sum_k w_k (u(x_k) - u(y_k)). Throws NotLip1 unless
/// u.lip <= 1 and the sampled Lipschitz check stays within lip + 1e-9.
double duality_gap(const MapPlan& plan, const Potential& u);

/// Integral of a smooth test function against sigma of the plan:
/// sum_k w_k * integral of phi along [x_k, y_k] (5-point Gauss per
/// segment). With `restrict_to`, each segment is cut at its first boundary
/// crossing, i.e. sigma restricted to the domain when sources lie inside.
double segment_integral(const MapPlan& plan, const ScalarMap& phi, const Domain* restrict_to = nullptr);

/// Relative L1 difference of two densities over the cells whose centers lie
/// in `domain`. Throws GridMismatch if the grids differ.
double restriction_discrepancy(const DensityField& full, const DensityField& projected,
                               const Domain& domain);

}  // namespace tdlab
