#include "otode/ode.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "otode/errors.hpp"
#include "otode/linalg.hpp"

namespace otode {

std::array<double, 4> RK3Tableau::order_condition_residuals() const {
  return {b1 + b2 + b3 - 1.0,
          b2 * c2 + b3 * c3 - 0.5,
          b2 * c2 * c2 + b3 * c3 * c3 - 1.0 / 3.0,
          b3 * a32 * c2 - 1.0 / 6.0};
}

RK3Tableau make_tableau(double alpha, double beta) {
  constexpr double eps = 1e-12;
  if (std::abs(alpha) < eps || std::abs(beta) < eps)
    throw std::invalid_argument("make_tableau: alpha and beta must be nonzero");
  if (std::abs(alpha - beta) < eps)
    throw std::invalid_argument("make_tableau: alpha must differ from beta");
  if (std::abs(alpha - 2.0 / 3.0) < eps)
    throw std::invalid_argument("make_tableau: alpha = 2/3 is inadmissible");

  RK3Tableau tb;
  tb.alpha = alpha;
  tb.beta = beta;
  tb.a21 = alpha;
  tb.a31 = (beta / alpha) * (beta - 3.0 * alpha * (1.0 - alpha)) / (3.0 * alpha - 2.0);
  tb.a32 = -(beta / alpha) * (beta - alpha) / (3.0 * alpha - 2.0);
  tb.b1 = 1.0 - (3.0 * alpha + 3.0 * beta - 2.0) / (6.0 * alpha * beta);
  tb.b2 = (3.0 * beta - 2.0) / (6.0 * alpha * (beta - alpha));
  tb.b3 = (2.0 - 3.0 * alpha) / (6.0 * beta * (beta - alpha));
  tb.c2 = alpha;
  tb.c3 = beta;

  const auto res = tb.order_condition_residuals();
  const double scale =
      std::max({1.0, std::abs(tb.b1), std::abs(tb.b2), std::abs(tb.b3)});
  for (double r : res)
    if (std::abs(r) > 1e-12 * scale)
      throw std::invalid_argument("make_tableau: order conditions violated");
  if (std::abs(tb.a31 + tb.a32 - tb.c3) > 1e-12 * std::max(1.0, std::abs(tb.c3)))
    throw std::invalid_argument("make_tableau: stage consistency violated");
  return tb;
}

Potential initial_potential(const std::vector<double>& weights) {
  std::vector<double> psi(weights.size());
  for (size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] > 0.0))
      throw std::invalid_argument("initial_potential: weights must be positive");
    psi[k] = std::log(weights[k]);
  }
  return Potential::zero_mean(std::move(psi));
}

std::vector<double> ivp_rhs(const Problem& problem, const Potential& psi, double t,
                            const QuadratureSpec& spec) {
  SymmetricMatrix H = dual_hessian(problem, psi, t, spec);
  std::vector<double> dtg = dual_gradient_dt(problem, psi, t, spec);
  std::vector<double> x = projected_solve(H, dtg);
  for (double& v : x) v = -v;
  return x;
}

std::vector<double> rk3_step(
    const std::function<std::vector<double>(double, const std::vector<double>&)>& f,
    double t, const std::vector<double>& y, double h, const RK3Tableau& tb) {
  const size_t n = y.size();
  std::vector<double> k1 = f(t, y);
  std::vector<double> stage(n);
  for (size_t i = 0; i < n; ++i) stage[i] = y[i] + h * tb.a21 * k1[i];
  std::vector<double> k2 = f(t + tb.c2 * h, stage);
  for (size_t i = 0; i < n; ++i) stage[i] = y[i] + h * (tb.a31 * k1[i] + tb.a32 * k2[i]);
  std::vector<double> k3 = f(t + tb.c3 * h, stage);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i)
    out[i] = y[i] + h * (tb.b1 * k1[i] + tb.b2 * k2[i] + tb.b3 * k3[i]);
  return out;
}

SolveResult solve_ivp(const Problem& problem, double h, const RK3Tableau& tableau,
                      const SolveOptions& options) {
  problem.validate();
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("solve_ivp: h must lie in (0,1)");
  const long long n_steps = std::llround(1.0 / h);
  if (n_steps < 1 || std::abs(n_steps * h - 1.0) > 1e-9)
    throw std::invalid_argument("solve_ivp: 1/h must be a positive integer");
  if (!(tableau.c2 >= 0.0 && tableau.c2 < 1.0 && tableau.c3 >= 0.0 && tableau.c3 < 1.0))
    throw std::invalid_argument(
        "solve_ivp: stage times must stay in [0,1) so the final step never "
        "evaluates at t=1");

  const auto t_start = std::chrono::steady_clock::now();
  const int n = problem.num_targets();

  SolveResult result;
  Trajectory& traj = result.trajectory;
  SolveReport& report = result.report;

  Potential psi = initial_potential(problem.target.weights);
  traj.times.push_back(0.0);
  traj.potentials.push_back(psi);

  report.status = SolveStatus::Converged;
  const SolveHooks& hooks = options.hooks;

  for (long long i = 0; i < n_steps; ++i) {
    const double t0 = static_cast<double>(i) / static_cast<double>(n_steps);
    const double t1 = static_cast<double>(i + 1) / static_cast<double>(n_steps);
    const double dt = t1 - t0;
    try {
      SymmetricMatrix H0 = dual_hessian(problem, psi, t0, options.quad);
      std::vector<double> dtg0 = dual_gradient_dt(problem, psi, t0, options.quad);
      std::vector<double> k1 = projected_solve(H0, dtg0);
      for (double& v : k1) v = -v;

      if (hooks.record_every > 0 && i % hooks.record_every == 0) {
        StepRecord rec;
        rec.t = t0;
        double norm2 = 0.0;
        for (double v : k1) norm2 += v * v;
        rec.rhs_norm = std::sqrt(norm2);
        rec.quad_converged = true;
        if (hooks.record_lambda_min)
          rec.lambda_min = restricted_eigenvalues(H0).front();
        if (hooks.record_cell_masses) {
          CellMassOptions mass_options;
          mass_options.raster_resolution = hooks.raster_resolution;
          mass_options.quad = options.quad;
          rec.cell_masses = cell_masses(problem, psi, mass_options);
        }
        traj.step_records.push_back(std::move(rec));
      }

      std::vector<double> stage2(n), stage3(n);
      for (int j = 0; j < n; ++j) stage2[j] = psi[j] + dt * tableau.a21 * k1[j];
      std::vector<double> k2 = ivp_rhs(problem, Potential::zero_mean(std::move(stage2)),
                                       t0 + tableau.c2 * dt, options.quad);
      for (int j = 0; j < n; ++j)
        stage3[j] = psi[j] + dt * (tableau.a31 * k1[j] + tableau.a32 * k2[j]);
      std::vector<double> k3 = ivp_rhs(problem, Potential::zero_mean(std::move(stage3)),
                                       t0 + tableau.c3 * dt, options.quad);

      std::vector<double> next(n);
      bool finite = true;
      for (int j = 0; j < n; ++j) {
        next[j] = psi[j] + dt * (tableau.b1 * k1[j] + tableau.b2 * k2[j] + tableau.b3 * k3[j]);
        finite = finite && std::isfinite(next[j]);
      }
      if (!finite) throw QuadratureError("non-finite state reached");

      psi = Potential::zero_mean(std::move(next));
      traj.times.push_back(t1);
      traj.potentials.push_back(psi);
      report.steps = static_cast<int>(i) + 1;
    } catch (const QuadratureNotConverged& e) {
      report.status = SolveStatus::Failed;
      report.failure_reason = e.what();
      break;
    } catch (const QuadratureError& e) {
      report.status = SolveStatus::Failed;
      report.failure_reason = e.what();
      break;
    } catch (const SingularSystemError& e) {
      report.status = SolveStatus::Failed;
      report.failure_reason = e.what();
      break;
    }
  }

  report.final_potential = traj.potentials.back();
  report.last_time = traj.times.back();

  CellMassOptions mass_options;
  mass_options.raster_resolution = options.raster_resolution;
  mass_options.quad = options.quad;
  std::vector<double> masses = cell_masses(problem, report.final_potential, mass_options);
  double merr = 0.0;
  for (int k = 0; k < n; ++k)
    merr = std::max(merr, std::abs(masses[k] - problem.target.weights[k]));
  report.measure_error = merr;

  if (options.reference) {
    double err = 0.0;
    for (int k = 0; k < n; ++k)
      err = std::max(err, std::abs(report.final_potential[k] - (*options.reference)[k]));
    report.error_sup = err;
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace otode
