#pragma once

#include <optional>

#include "otode/cells.hpp"
#include "otode/report.hpp"

namespace otode {

struct NewtonConfig {
  double tol = 1e-12;  // sup norm of the residual G
  int max_iters = 100;
  double fd_step = 1e-5;  // centered-difference Jacobian step (2-d/3-d)
  double damping = 1.0;
  int raster_resolution = 0;  // 0 = per-dimension default
  QuadratureSpec quad = QuadratureSpec::for_dim(1);
  std::optional<Potential> reference;  // for error reporting
};

// G_i = mu_i - rho(Lag_i(psi)).
std::vector<double> newton_residual(const Problem& problem, const Potential& psi,
                                    const CellMassOptions& options = {});

// Exact Jacobian of G in 1-d: for cells meeting at an interior boundary x_ij,
// dG_i/dpsi_j = rho(x_ij) / |d/dx c(x_ij,y_i) - d/dx c(x_ij,y_j)|; boundaries
// clamped to the domain edge contribute nothing; diagonal is minus the row
// sum. Throws SingularSystemError on a coincident boundary gradient.
SymmetricMatrix newton_jacobian_1d(const Problem& problem, const Potential& psi);

// Damped Newton iteration psi <- psi - [grad G]^dagger G on the zero-mean
// complement; exact Jacobian in 1-d, centered finite differences of the
// rasterized masses in 2-d/3-d. Divergence (5 consecutive residual increases,
// NaN, or a singular Jacobian) yields a Failed report.
SolveReport newton_solve(const Problem& problem, const Potential& psi0,
                         const NewtonConfig& config = {});

}  // namespace otode
