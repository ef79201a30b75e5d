#include "otode/cells.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace otode {

namespace {

constexpr double kBoundaryTol = 1e-14;
constexpr int kBisectionCap = 200;

std::vector<int> sorted_target_order(const Problem& problem) {
  const int n = problem.num_targets();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return problem.target.point(a)[0] < problem.target.point(b)[0];
  });
  for (int k = 0; k + 1 < n; ++k) {
    const double ya = problem.target.point(order[k])[0];
    const double yb = problem.target.point(order[k + 1])[0];
    if (!(yb - ya > kBoundaryTol))
      throw std::invalid_argument("laguerre_partition_1d: duplicate target points");
  }
  return order;
}

int default_resolution(int dim) { return dim == 2 ? 512 : 128; }

}  // namespace

CellDecomposition1D laguerre_partition_1d(const Problem& problem, const Potential& psi) {
  if (problem.dim() != 1)
    throw std::invalid_argument("laguerre_partition_1d: 1-d problems only");
  if (psi.size() != problem.num_targets())
    throw std::invalid_argument("laguerre_partition_1d: potential length mismatch");
  const int n = problem.num_targets();
  const double lo = problem.source.domain.lower[0];
  const double hi = problem.source.domain.upper[0];

  CellDecomposition1D cells;
  cells.order = sorted_target_order(problem);

  // score(x, k) = c(x, y_k) - psi_k; the owner of x is the argmin. With
  // sorted targets and p >= 2 the owner index is nondecreasing in x, so
  // {owner <= k} is an interval [lo, B_k] and B_k is found by bisection on
  // the sign of min_{j<=k} score - min_{l>k} score. This stays exact when
  // interior cells are empty.
  auto score = [&](double x, int target) {
    return problem.cost(&x, problem.target.point(target), 1) - psi[target];
  };
  auto split_sign = [&](double x, int k) {
    double left = std::numeric_limits<double>::infinity();
    double right = left;
    for (int j = 0; j <= k; ++j) left = std::min(left, score(x, cells.order[j]));
    for (int j = k + 1; j < n; ++j) right = std::min(right, score(x, cells.order[j]));
    return left - right;  // <= 0 when owner(x) <= k (ties owned by lower index)
  };

  cells.boundaries.resize(n - 1);
  for (int k = 0; k + 1 < n; ++k) {
    if (split_sign(lo, k) > 0.0) {
      cells.boundaries[k] = lo;
      continue;
    }
    if (split_sign(hi, k) <= 0.0) {
      cells.boundaries[k] = hi;
      continue;
    }
    double a = lo, b = hi;
    for (int iter = 0; iter < kBisectionCap && b - a > kBoundaryTol; ++iter) {
      const double mid = 0.5 * (a + b);
      (split_sign(mid, k) <= 0.0 ? a : b) = mid;
    }
    cells.boundaries[k] = 0.5 * (a + b);
  }
  for (int k = 1; k + 1 < n; ++k)
    cells.boundaries[k] = std::max(cells.boundaries[k], cells.boundaries[k - 1]);
  return cells;
}

RasterGrid rasterize_cells(const Problem& problem, const Potential& psi, int res_per_axis) {
  const int dim = problem.dim();
  if (dim < 2) throw std::invalid_argument("rasterize_cells: 2-d/3-d problems only");
  if (res_per_axis <= 0) res_per_axis = default_resolution(dim);
  const int n = problem.num_targets();

  RasterGrid grid;
  grid.dim = dim;
  long long total = 1;
  for (int a = 0; a < dim; ++a) {
    grid.resolution[a] = res_per_axis;
    total *= res_per_axis;
  }
  grid.labels.resize(total);
  grid.weights.resize(total);

  std::array<double, 3> step{}, origin{};
  double cellvol = 1.0;
  for (int a = 0; a < dim; ++a) {
    step[a] = (problem.source.domain.upper[a] - problem.source.domain.lower[a]) /
              res_per_axis;
    origin[a] = problem.source.domain.lower[a] + 0.5 * step[a];
    cellvol *= step[a];
  }

  std::array<double, 3> x{};
  for (long long idx = 0; idx < total; ++idx) {
    long long rest = idx;
    for (int a = dim - 1; a >= 0; --a) {
      x[a] = origin[a] + step[a] * static_cast<double>(rest % res_per_axis);
      rest /= res_per_axis;
    }
    int best = 0;
    double best_score = problem.cost(x.data(), problem.target.point(0), dim) - psi[0];
    for (int k = 1; k < n; ++k) {
      const double s = problem.cost(x.data(), problem.target.point(k), dim) - psi[k];
      if (s < best_score) {
        best_score = s;
        best = k;
      }
    }
    grid.labels[idx] = best;
    grid.weights[idx] = problem.source(x.data()) * cellvol;
  }
  return grid;
}

std::vector<double> raster_masses(const RasterGrid& grid, int n_targets) {
  std::vector<double> masses(n_targets, 0.0);
  for (size_t i = 0; i < grid.labels.size(); ++i) masses[grid.labels[i]] += grid.weights[i];
  return masses;
}

void write_raster_labels(const RasterGrid& grid, std::ostream& os) {
  long long row_len = grid.resolution[grid.dim - 1];
  for (size_t i = 0; i < grid.labels.size(); ++i) {
    os << grid.labels[i];
    os << (((i + 1) % row_len == 0) ? '\n' : ' ');
  }
}

std::vector<double> cell_masses(const Problem& problem, const Potential& psi,
                                const CellMassOptions& options) {
  const int n = problem.num_targets();
  if (problem.dim() == 1) {
    CellDecomposition1D cells = laguerre_partition_1d(problem, psi);
    std::vector<double> masses(n, 0.0);
    double left = problem.source.domain.lower[0];
    for (int k = 0; k < n; ++k) {
      const double right =
          (k + 1 < n) ? cells.boundaries[k] : problem.source.domain.upper[0];
      if (right - left > kBoundaryTol) {
        BoxDomain segment;
        segment.lower = {left};
        segment.upper = {right};
        auto piece =
            integrate_scalar([&](const double* x) { return problem.source(x); }, segment,
                             options.quad);
        masses[cells.order[k]] = piece.value[0];
      }
      left = std::max(left, right);
    }
    return masses;
  }
  RasterGrid grid = rasterize_cells(problem, psi, options.raster_resolution);
  return raster_masses(grid, n);
}

Potential exact_potential_1d(const Problem& problem, const QuadratureSpec& spec) {
  if (problem.dim() != 1)
    throw std::invalid_argument("exact_potential_1d: 1-d problems only");
  const int n = problem.num_targets();
  const double lo = problem.source.domain.lower[0];
  const double hi = problem.source.domain.upper[0];
  std::vector<int> order = sorted_target_order(problem);

  auto cdf = [&](double x) {
    if (x <= lo) return 0.0;
    BoxDomain segment;
    segment.lower = {lo};
    segment.upper = {x};
    return integrate_scalar([&](const double* p) { return problem.source(p); }, segment,
                            spec)
        .value[0];
  };

  // Monotone 1-d transport: boundary k carries cumulative mass of the first
  // k+1 sorted targets.
  std::vector<double> boundaries(n - 1);
  double cum = 0.0;
  for (int k = 0; k + 1 < n; ++k) {
    cum += problem.target.weights[order[k]];
    double a = lo, b = hi;
    for (int iter = 0; iter < kBisectionCap && b - a > kBoundaryTol; ++iter) {
      const double mid = 0.5 * (a + b);
      (cdf(mid) < cum ? a : b) = mid;
    }
    boundaries[k] = 0.5 * (a + b);
  }

  std::vector<double> psi(n, 0.0);
  for (int k = 0; k + 1 < n; ++k) {
    const double x = boundaries[k];
    const double step = problem.cost(&x, problem.target.point(order[k + 1]), 1) -
                        problem.cost(&x, problem.target.point(order[k]), 1);
    psi[order[k + 1]] = psi[order[k]] + step;
  }
  return Potential::zero_mean(std::move(psi));
}

}  // namespace otode
