#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "otode/cells.hpp"
#include "otode/entropic.hpp"
#include "otode/report.hpp"

namespace otode {

// Two-parameter family of third-order Runge-Kutta tableaus. Stage times are
// c2 = alpha and c3 = beta; admissibility requires alpha, beta != 0,
// alpha != beta, alpha != 2/3. Order conditions are verified at construction.
struct RK3Tableau {
  double alpha = 0.0, beta = 0.0;
  double a21 = 0.0, a31 = 0.0, a32 = 0.0;
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;
  double c2 = 0.0, c3 = 0.0;

  // Residuals of the four order conditions, in order:
  // sum b - 1, sum b c - 1/2, sum b c^2 - 1/3, b3 a32 c2 - 1/6.
  std::array<double, 4> order_condition_residuals() const;
};

RK3Tableau make_tableau(double alpha, double beta);

// psi(0) = log mu - mean(log mu): the exact minimizer at t = 0.
Potential initial_potential(const std::vector<double>& weights);

// Right-hand side of the continuation IVP:
//   psi'(t) = -[dual_hessian]^dagger dual_gradient_dt,
// the pseudo-inverse taken on the zero-mean complement.
std::vector<double> ivp_rhs(const Problem& problem, const Potential& psi, double t,
                            const QuadratureSpec& spec);

struct StepRecord {
  double t = 0.0;
  double rhs_norm = 0.0;  // |psi'(t)|_2 at the step start
  bool quad_converged = true;
  std::optional<double> lambda_min;               // smallest restricted eigenvalue
  std::optional<std::vector<double>> cell_masses;  // unregularized masses at psi(t)
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Potential> potentials;
  std::vector<StepRecord> step_records;
};

struct SolveHooks {
  int record_every = 1;  // <= 0 disables step records entirely
  bool record_lambda_min = false;
  bool record_cell_masses = false;
  int raster_resolution = 0;  // for hook cell masses in 2-d/3-d
};

struct SolveOptions {
  QuadratureSpec quad = QuadratureSpec::for_dim(1);
  SolveHooks hooks;
  std::optional<Potential> reference;  // exact solution for error reporting
  int raster_resolution = 0;           // for the final measure error
};

struct SolveResult {
  Trajectory trajectory;
  SolveReport report;
};

// Fixed-step RK3 march of the continuation IVP from t=0 to t=1. Requires 1/h
// to be a positive integer; stage times never reach t=1 because c2, c3 < 1.
// Every accepted state is re-projected to zero mean. A quadrature failure or
// singular solve aborts with the partial trajectory and Failed status.
SolveResult solve_ivp(const Problem& problem, double h, const RK3Tableau& tableau,
                      const SolveOptions& options = {});

// One explicit RK3 step of y' = f(t, y); shared by solve_ivp and the
// synthetic-equation order tests.
std::vector<double> rk3_step(
    const std::function<std::vector<double>(double, const std::vector<double>&)>& f,
    double t, const std::vector<double>& y, double h, const RK3Tableau& tableau);

}  // namespace otode
