#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "otode/entropic.hpp"
#include "otode/problem.hpp"
#include "otode/quadrature.hpp"

namespace otode {

// Interval decomposition of a 1-d domain into Laguerre cells. boundaries[k]
// is the right endpoint of the union of the first k+1 cells in sorted-target
// order; order maps sorted cell index to the original target index.
struct CellDecomposition1D {
  std::vector<double> boundaries;  // N-1 sorted points inside [lower, upper]
  std::vector<int> order;          // sorted position -> target index
};

CellDecomposition1D laguerre_partition_1d(const Problem& problem, const Potential& psi);

// Rasterized cell ownership for 2-d/3-d: each raster cell is assigned to the
// argmin of c(center, y_k) - psi_k, ties to the lowest index.
struct RasterGrid {
  int dim = 2;
  std::array<int, 3> resolution = {0, 0, 0};
  std::vector<std::int32_t> labels;  // row-major
  std::vector<double> weights;       // density(center) * cell volume
};

RasterGrid rasterize_cells(const Problem& problem, const Potential& psi, int res_per_axis);

std::vector<double> raster_masses(const RasterGrid& grid, int n_targets);

// Plain-text dump, one row of labels per line (last axis fastest).
void write_raster_labels(const RasterGrid& grid, std::ostream& os);

struct CellMassOptions {
  // 0 picks the per-dimension default: 512 (2-d), 128 (3-d).
  int raster_resolution = 0;
  QuadratureSpec quad = QuadratureSpec::for_dim(1);
};

// rho-measure of every Laguerre cell. Exact interval integration in 1-d,
// density-weighted midpoint sums on the raster grid in 2-d/3-d. Empty cells
// report mass 0.
std::vector<double> cell_masses(const Problem& problem, const Potential& psi,
                                const CellMassOptions& options = {});

// Reference dual vector for 1-d problems with p >= 2: boundaries are placed
// where the source CDF matches the cumulative target weights, and potential
// differences follow from the boundary equations. Independent of both the
// continuation and Newton solvers.
Potential exact_potential_1d(const Problem& problem,
                             const QuadratureSpec& spec = QuadratureSpec::for_dim(1));

}  // namespace otode
