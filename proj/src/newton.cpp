#include "otode/newton.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "otode/errors.hpp"
#include "otode/linalg.hpp"

namespace otode {

std::vector<double> newton_residual(const Problem& problem, const Potential& psi,
                                    const CellMassOptions& options) {
  std::vector<double> g = cell_masses(problem, psi, options);
  for (int k = 0; k < problem.num_targets(); ++k)
    g[k] = problem.target.weights[k] - g[k];
  return g;
}

SymmetricMatrix newton_jacobian_1d(const Problem& problem, const Potential& psi) {
  if (problem.dim() != 1)
    throw std::invalid_argument("newton_jacobian_1d: 1-d problems only");
  const int n = problem.num_targets();
  CellDecomposition1D cells = laguerre_partition_1d(problem, psi);
  const double lo = problem.source.domain.lower[0];
  const double hi = problem.source.domain.upper[0];

  SymmetricMatrix grad(n);
  for (int k = 0; k + 1 < n; ++k) {
    const double x = cells.boundaries[k];
    // A boundary clamped to the domain edge is not an interior interface:
    // perturbing psi moves no mass through it, so it contributes nothing.
    if (!(x > lo + 1e-13 && x < hi - 1e-13)) continue;
    const int i = cells.order[k];
    const int j = cells.order[k + 1];
    const double denom = std::abs(problem.cost.grad_1d(x, problem.target.point(i)[0]) -
                                  problem.cost.grad_1d(x, problem.target.point(j)[0]));
    if (denom < 1e-14)
      throw SingularSystemError("newton_jacobian_1d: coincident boundary gradient", 0.0);
    const double entry = problem.source(&x) / denom;
    grad.at(i, j) += entry;
    grad.at(j, i) += entry;
  }
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) row += grad.at(i, j);
    grad.at(i, i) = -row;
  }
  return grad;
}

namespace {

SymmetricMatrix fd_jacobian(const Problem& problem, const Potential& psi,
                            const NewtonConfig& config) {
  const int n = problem.num_targets();
  CellMassOptions mass_options;
  mass_options.raster_resolution = config.raster_resolution;
  mass_options.quad = config.quad;
  SymmetricMatrix jac(n);
  const double h = config.fd_step;
  for (int j = 0; j < n; ++j) {
    std::vector<double> plus = psi.values, minus = psi.values;
    plus[j] += h;
    minus[j] -= h;
    // G is invariant under constant shifts, so the raw coordinate
    // perturbation measures the same derivative as its projection.
    Potential psi_p, psi_m;
    psi_p.values = std::move(plus);
    psi_m.values = std::move(minus);
    std::vector<double> gp = newton_residual(problem, psi_p, mass_options);
    std::vector<double> gm = newton_residual(problem, psi_m, mass_options);
    for (int i = 0; i < n; ++i) jac.at(i, j) = (gp[i] - gm[i]) / (2.0 * h);
  }
  // Symmetrize; raster noise breaks exact symmetry.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (jac.at(i, j) + jac.at(j, i));
      jac.at(i, j) = v;
      jac.at(j, i) = v;
    }
  return jac;
}

}  // namespace

SolveReport newton_solve(const Problem& problem, const Potential& psi0,
                         const NewtonConfig& config) {
  problem.validate();
  if (psi0.size() != problem.num_targets())
    throw std::invalid_argument("newton_solve: initial guess length mismatch");
  if (!(config.tol > 0.0) || config.max_iters < 1 || !(config.fd_step > 0.0) ||
      !(config.damping > 0.0 && config.damping <= 1.0))
    throw std::invalid_argument("newton_solve: invalid configuration");
  const auto t_start = std::chrono::steady_clock::now();
  const int n = problem.num_targets();

  CellMassOptions mass_options;
  mass_options.raster_resolution = config.raster_resolution;
  mass_options.quad = config.quad;

  SolveReport report;
  report.status = SolveStatus::Failed;
  Potential psi = psi0;

  int grow_streak = 0;
  double prev_norm = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter <= config.max_iters; ++iter) {
    std::vector<double> g = newton_residual(problem, psi, mass_options);
    double norm = 0.0;
    bool finite = true;
    for (double v : g) {
      finite = finite && std::isfinite(v);
      norm = std::max(norm, std::abs(v));
    }
    report.residual_history.push_back(norm);
    report.final_residual_sup = norm;
    report.steps = iter;
    if (!finite) {
      report.failure_reason = "non-finite residual";
      break;
    }
    if (norm <= config.tol) {
      report.status = SolveStatus::Converged;
      break;
    }
    if (iter == config.max_iters) {
      report.failure_reason = "iteration limit reached";
      break;
    }
    grow_streak = (norm > prev_norm) ? grow_streak + 1 : 0;
    if (grow_streak >= 5) {
      report.failure_reason = "diverging residual";
      break;
    }
    prev_norm = norm;

    try {
      SymmetricMatrix jac = problem.dim() == 1 ? newton_jacobian_1d(problem, psi)
                                               : fd_jacobian(problem, psi, config);
      std::vector<double> step = projected_solve(jac, g);
      std::vector<double> next = psi.values;
      bool step_finite = true;
      for (int k = 0; k < n; ++k) {
        next[k] -= config.damping * step[k];
        step_finite = step_finite && std::isfinite(next[k]);
      }
      if (!step_finite) {
        report.failure_reason = "non-finite Newton step";
        break;
      }
      psi = Potential::zero_mean(std::move(next));
    } catch (const SingularSystemError& e) {
      report.failure_reason = e.what();
      break;
    } catch (const QuadratureNotConverged& e) {
      report.failure_reason = e.what();
      break;
    }
  }

  report.final_potential = psi;
  report.last_time = 1.0;
  std::vector<double> masses = cell_masses(problem, psi, mass_options);
  double merr = 0.0;
  for (int k = 0; k < n; ++k)
    merr = std::max(merr, std::abs(masses[k] - problem.target.weights[k]));
  report.measure_error = merr;
  if (config.reference) {
    double err = 0.0;
    for (int k = 0; k < n; ++k)
      err = std::max(err, std::abs(psi[k] - (*config.reference)[k]));
    report.error_sup = err;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

}  // namespace otode
