// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// selected criterion fails. With no arguments every criterion runs; a single
// numeric argument selects one criterion (that is how ctest registers them).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "otode/cells.hpp"
#include "otode/diagnostics.hpp"
#include "otode/linalg.hpp"
#include "otode/newton.hpp"
#include "otode/ode.hpp"
#include "otode/problem.hpp"

using namespace otode;

namespace {

struct Criterion {
  std::string name;
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED " + what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

SolveResult run(const Problem& problem, double dt, const SolveOptions& options) {
  RK3Tableau tb = make_tableau(0.125, 0.25);
  return solve_ivp(problem, dt, tb, options);
}

// Shared fixtures, computed on first use so single-criterion runs stay lean.
class Fixtures {
 public:
  const Problem& e1() {
    if (!e1_) e1_ = builtin_example("E1");
    return *e1_;
  }
  const Potential& e1_reference() {
    if (!e1_ref_) e1_ref_ = exact_potential_1d(e1());
    return *e1_ref_;
  }
  // dt = 1e-3 continuation of E1 with per-step records.
  const SolveResult& e1_fine() {
    if (!e1_fine_) {
      SolveOptions options;
      options.reference = e1_reference();
      options.hooks.record_every = 1;
      e1_fine_ = run(e1(), 1e-3, options);
    }
    return *e1_fine_;
  }

 private:
  std::optional<Problem> e1_;
  std::optional<Potential> e1_ref_;
  std::optional<SolveResult> e1_fine_;
};

}  // namespace

int main(int argc, char** argv) {
  Fixtures fx;
  std::vector<std::pair<std::string, std::function<void(Criterion&)>>> criteria;

  criteria.emplace_back("criterion 1: E1 sweep dt=1e-1,1e-2,1e-3 (p=2)",
                        [&](Criterion& c) {
    const double expected[3] = {1.3891e-3, 3.2996e-7, 3.9462e-10};
    const double dts[3] = {1e-1, 1e-2, 1e-3};
    std::vector<double> errors;
    for (int i = 0; i < 3; ++i) {
      double err;
      if (i == 2) {
        c.require(fx.e1_fine().report.converged(), "solve dt=0.001");
        if (!fx.e1_fine().report.converged()) continue;
        err = *fx.e1_fine().report.error_sup;
      } else {
        SolveOptions options;
        options.reference = fx.e1_reference();
        SolveResult result = run(fx.e1(), dts[i], options);
        c.require(result.report.converged(), "solve dt=" + fmt(dts[i]));
        if (!result.report.converged()) continue;
        err = *result.report.error_sup;
      }
      errors.push_back(err);
      c.note("err(" + fmt(dts[i]) + ")=" + fmt(err));
      c.require(err <= 50.0 * expected[i] && err >= expected[i] / 50.0,
                "error within factor 50 of " + fmt(expected[i]));
    }
    if (errors.size() == 3) {
      const double slope = std::log10(errors[0] / errors[2]) / 2.0;
      c.note("slope=" + fmt(slope));
      c.require(slope >= 2.5, "log-log slope >= 2.5");
    }
  });

  criteria.emplace_back("criterion 2: E2/E3 sweeps dt=1e-2", [&](Criterion& c) {
    Problem e2 = builtin_example("E2");
    SolveOptions o2;
    o2.reference = exact_potential_1d(e2);
    SolveResult r2 = run(e2, 1e-2, o2);
    c.require(r2.report.converged(), "E2 solve");
    if (r2.report.converged()) {
      c.note("E2 err=" + fmt(*r2.report.error_sup));
      c.require(*r2.report.error_sup <= 1e-4, "E2 error <= 1e-4");
    }

    Problem e3 = builtin_example("E3");
    SolveOptions o3;
    o3.reference = exact_potential_1d(e3);
    SolveResult r3 = run(e3, 1e-2, o3);
    c.require(r3.report.converged(), "E3 solve (targets outside the domain)");
    if (r3.report.converged()) {
      c.note("E3 err=" + fmt(*r3.report.error_sup));
      c.require(*r3.report.error_sup <= 1e-2, "E3 error <= 1e-2");
    }
  });

  criteria.emplace_back("criterion 3: E1 cubic cost dt=1e-3", [&](Criterion& c) {
    Problem e1c = builtin_example("E1");
    e1c.cost.exponent = 3.0;
    SolveOptions options;
    options.reference = exact_potential_1d(e1c);
    SolveResult result = run(e1c, 1e-3, options);
    c.require(result.report.converged(), "solve");
    if (result.report.converged()) {
      c.note("err=" + fmt(*result.report.error_sup));
      c.require(*result.report.error_sup <= 1e-6, "error <= 1e-6");
    }
  });

  criteria.emplace_back("criterion 4: Newton E1 converges, E3 fails from zero",
                        [&](Criterion& c) {
    NewtonConfig config;
    config.reference = fx.e1_reference();
    SolveReport n1 = newton_solve(fx.e1(), Potential::zero_mean({0.0, 0.0, 0.0}), config);
    c.require(n1.converged(), "E1 Newton convergence");
    if (n1.converged()) {
      c.note("E1 err=" + fmt(*n1.error_sup));
      c.require(*n1.error_sup <= 1e-10, "E1 error <= 1e-10");
    }
    Problem e3 = builtin_example("E3");
    SolveReport n3 = newton_solve(e3, Potential::zero_mean(std::vector<double>(4, 0.0)));
    c.require(!n3.converged(), "E3 Newton failure");
  });

  criteria.emplace_back("criterion 5: E4 (b=0.5, p=2) dt=1e-1 and dt=1e-2",
                        [&](Criterion& c) {
    Problem e4 = builtin_example("E4", {0.5});
    SolveOptions options;
    options.quad = QuadratureSpec::for_dim(2);
    options.reference = Potential::zero_mean(*exact_solution("E4", {0.5}));
    SolveResult coarse = run(e4, 1e-1, options);
    c.require(coarse.report.converged(), "solve dt=0.1");
    if (coarse.report.converged()) {
      c.note("err(0.1)=" + fmt(*coarse.report.error_sup));
      c.require(*coarse.report.error_sup <= 1e-2, "dt=0.1 error <= 1e-2");
    }
    // The runtime budget easily covers the finer mesh here.
    SolveResult fine = run(e4, 1e-2, options);
    c.require(fine.report.converged(), "solve dt=0.01");
    if (fine.report.converged()) {
      c.note("err(0.01)=" + fmt(*fine.report.error_sup));
      c.require(*fine.report.error_sup <= 1e-4, "dt=0.01 error <= 1e-4");
    }
  });

  criteria.emplace_back("criterion 6: E5 (p=4) dt=1e-1", [&](Criterion& c) {
    Problem e5 = builtin_example("E5");
    SolveOptions options;
    options.quad = QuadratureSpec::for_dim(2);
    options.reference = Potential::zero_mean(*exact_solution("E5"));
    SolveResult result = run(e5, 1e-1, options);
    c.require(result.report.converged(), "solve");
    if (result.report.converged()) {
      c.note("err=" + fmt(*result.report.error_sup));
      c.require(*result.report.error_sup <= 5e-3, "error <= 5e-3");
    }
  });

  criteria.emplace_back("criterion 7: E7 (3-d) dt=1e-1 measure error", [&](Criterion& c) {
    Problem e7 = builtin_example("E7");
    SolveOptions options;
    options.quad = QuadratureSpec::for_dim(3);
    options.raster_resolution = 128;
    SolveResult result = run(e7, 1e-1, options);
    c.require(result.report.converged(), "solve");
    c.note("measure_err=" + fmt(result.report.measure_error));
    c.require(result.report.measure_error <= 5e-2, "measure error <= 5e-2");
  });

  criteria.emplace_back("criterion 8: property suite", [&](Criterion& c) {
    auto spec1 = QuadratureSpec::for_dim(1);
    RK3Tableau tableau = make_tableau(0.125, 0.25);

    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (std::uint64_t seed : {21u, 22u, 23u, 24u, 25u}) {
      Problem p = random_problem(1, 2 + static_cast<int>(seed % 3), seed);
      const int n = p.num_targets();
      std::vector<double> raw(n);
      for (double& v : raw) v = u(rng);
      Potential psi = Potential::zero_mean(std::move(raw));
      const double t = 0.5, h = 1e-5;

      auto grad = dual_gradient(p, psi, t, spec1);
      SymmetricMatrix hess = dual_hessian(p, psi, t, spec1);
      auto dtg = dual_gradient_dt(p, psi, t, spec1);

      auto gp = dual_gradient(p, psi, t + h, spec1);
      auto gm = dual_gradient(p, psi, t - h, spec1);
      for (int i = 0; i < n; ++i)
        c.require(std::abs(dtg[i] - (gp[i] - gm[i]) / (2 * h)) <= 1e-5,
                  "mixed derivative FD (seed " + std::to_string(seed) + ")");

      for (int j = 0; j < n; ++j) {
        std::vector<double> plus = psi.values, minus = psi.values;
        for (int k = 0; k < n; ++k) {
          const double e = (k == j ? 1.0 : 0.0) - 1.0 / n;
          plus[k] += h * e;
          minus[k] -= h * e;
        }
        const double fd_phi = (dual_value(p, Potential(plus), t, spec1) -
                               dual_value(p, Potential(minus), t, spec1)) /
                              (2 * h);
        double gsum = 0.0;
        for (double v : grad) gsum += v;
        c.require(std::abs(fd_phi - (grad[j] - gsum / n)) <= 1e-5, "gradient FD");

        auto ggp = dual_gradient(p, Potential(plus), t, spec1);
        auto ggm = dual_gradient(p, Potential(minus), t, spec1);
        for (int i = 0; i < n; ++i) {
          double hij = hess.at(i, j);
          double rowsum = 0.0;
          for (int k = 0; k < n; ++k) rowsum += hess.at(i, k);
          hij -= rowsum / n;
          c.require(std::abs((ggp[i] - ggm[i]) / (2 * h) - hij) <= 1e-5, "hessian FD");
        }
      }

      std::vector<double> ones(n, 1.0);
      for (double v : hess.multiply(ones)) c.require(std::abs(v) <= 1e-8, "hessian kernel");
      for (double lambda : restricted_eigenvalues(hess))
        c.require(lambda >= -1e-8, "restricted eigenvalues >= -1e-8");
    }

    std::mt19937_64 rng2(77);
    std::uniform_real_distribution<double> upar(0.1, 0.9);
    int accepted = 0;
    while (accepted < 20) {
      const double a = upar(rng2), b = upar(rng2);
      if (std::abs(a - b) < 0.1 || std::abs(a - 2.0 / 3.0) < 0.05) continue;
      RK3Tableau tb = make_tableau(a, b);
      for (double r : tb.order_condition_residuals())
        c.require(std::abs(r) <= 1e-14, "order conditions");
      ++accepted;
    }

    {
      auto g = [](double t) { return std::sin(t) + 2.0; };
      auto gp = [](double t) { return std::cos(t); };
      auto f = [&](double t, const std::vector<double>& y) {
        return std::vector<double>{-1.0 * (y[0] - g(t)) + gp(t)};
      };
      std::vector<double> errors;
      for (int n : {20, 40, 80}) {
        std::vector<double> y = {g(0.0)};
        const double h = 1.0 / n;
        for (int i = 0; i < n; ++i) y = rk3_step(f, i * h, y, h, tableau);
        errors.push_back(std::abs(y[0] - g(1.0)));
      }
      const double rate =
          0.5 * (std::log2(errors[0] / errors[1]) + std::log2(errors[1] / errors[2]));
      c.note("synthetic order=" + fmt(rate));
      c.require(rate >= 2.7 && rate <= 3.3, "order estimate in [2.7, 3.3]");
    }

    c.require(!fx.e1_fine().trajectory.potentials.empty(), "fine E1 trajectory available");
    for (const Potential& psi : fx.e1_fine().trajectory.potentials) {
      double sum = 0.0;
      for (double v : psi.values) sum += v;
      c.require(std::abs(sum) <= 1e-10, "zero-mean preservation");
    }

    {
      Problem e0 = builtin_example("E0");
      Potential ref = Potential::zero_mean({-0.15, 0.15});
      auto smooth = smoothed_cell_masses(e0, ref, 1.0 - 1e-3, spec1);
      auto hard = cell_masses(e0, ref);
      double gap = 0.0;
      for (int k = 0; k < 2; ++k) gap = std::max(gap, std::abs(smooth[k] - hard[k]));
      c.note("mass gap at t=1-1e-3: " + fmt(gap));
      c.require(gap <= 1e-2, "smoothed-to-hard mass gap <= 1e-2");
    }

    {
      // Evaluated along the solved trajectory, as stated. This encodes the
      // claimed t->1 decay of the mixed derivative; in one dimension the
      // measured norms plateau at a nonzero limit instead (see the decisions
      // record), so this sub-check documents an honest failure.
      double previous = 1e300;
      bool decreasing = true;
      std::string values;
      for (double t : {0.9, 0.99, 0.999}) {
        size_t at = 0;
        const Trajectory& traj = fx.e1_fine().trajectory;
        for (size_t i = 0; i < traj.times.size(); ++i)
          if (std::abs(traj.times[i] - t) < std::abs(traj.times[at] - t)) at = i;
        auto d = dual_gradient_dt(fx.e1(), traj.potentials[at], traj.times[at], spec1);
        double norm = 0.0;
        for (double v : d) norm += v * v;
        norm = std::sqrt(norm);
        values += (values.empty() ? "" : ", ") + fmt(norm);
        decreasing = decreasing && norm < previous;
        previous = norm;
      }
      c.require(decreasing,
                "mixed-derivative decay over t=0.9,0.99,0.999 (got " + values + ")");
    }

    {
      std::vector<double> lambda_min;
      for (double t : {0.9, 0.99, 0.999, 0.9999})
        lambda_min.push_back(
            restricted_eigenvalues(dual_hessian(fx.e1(), fx.e1_reference(), t, spec1))
                .front());
      double lo = lambda_min[0], hi = lambda_min[0];
      for (double v : lambda_min) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      c.note("lambda_min range [" + fmt(lo) + ", " + fmt(hi) + "]");
      c.require(lo >= 1e-6, "lambda_min >= 1e-6");
      c.require(hi / lo < 10.0, "lambda_min varies by < factor 10");
    }

    {
      Problem e0 = builtin_example("E0");
      Potential exact = Potential::zero_mean({-0.15, 0.15});
      SolveOptions options;
      options.reference = exact;
      SolveResult ode = run(e0, 1e-3, options);
      c.require(ode.report.converged() && *ode.report.error_sup <= 1e-8,
                "E0 continuation error <= 1e-8 (err=" +
                    fmt(ode.report.error_sup.value_or(-1.0)) + ")");
      NewtonConfig config;
      config.reference = exact;
      SolveReport newton = newton_solve(e0, Potential::zero_mean({0.0, 0.0}), config);
      c.require(newton.converged() && *newton.error_sup <= 1e-8,
                "E0 Newton error <= 1e-8");
    }
  });

  criteria.emplace_back("criterion 9: power-law fits on E0/E1", [&](Criterion& c) {
    auto spec1 = QuadratureSpec::for_dim(1);

    Problem e0 = builtin_example("E0");
    SolveOptions o0;
    o0.hooks.record_every = 1;
    SolveResult r0 = run(e0, 1e-3, o0);
    c.require(r0.report.converged(), "E0 solve for traces");
    c.require(!fx.e1_fine().trajectory.potentials.empty(), "fine E1 trajectory available");
    if (!r0.report.converged() || fx.e1_fine().trajectory.potentials.empty()) return;

    // Window [0.5, 0.9]: the fits degrade toward t=1 on refined meshes, so
    // the upper edge stays clear of the terminal layer.
    const double w0 = 0.5, w1 = 0.9;
    struct FitCase {
      const char* label;
      const SolveResult* result;
      const Problem* problem;
    };
    const FitCase cases[2] = {{"E0", &r0, &e0}, {"E1", &fx.e1_fine(), &fx.e1()}};
    for (const FitCase& fc : cases) {
      TraceSeries rhs = rhs_norm_trace(fc.result->trajectory);
      PowerLawFit fit = power_law_fit(rhs, 0, w0, w1);
      c.note(std::string(fc.label) + " |psi'| fit: C=" + fmt(fit.coefficient) +
             " k=" + fmt(fit.exponent) + " res=" + fmt(fit.rms_residual));
      c.require(fit.exponent > 0.0, std::string(fc.label) + " derivative exponent > 0");
      c.require(fit.rms_residual < 0.2,
                std::string(fc.label) + " derivative residual < 0.2");

      Potential ref = exact_potential_1d(*fc.problem);
      SymmetricMatrix limit = newton_jacobian_1d(*fc.problem, ref);
      for (double& v : limit.entries) v = -v;  // orient positive semidefinite
      std::vector<double> lambda_star = restricted_eigenvalues(limit);

      EigenTraceOptions eopts;
      eopts.every = 5;
      TraceSeries eig = eigen_trace(*fc.problem, fc.result->trajectory, spec1, eopts);
      TraceSeries err = eigen_error_series(eig, lambda_star);
      for (int col = 0; col < static_cast<int>(err.columns.size()); ++col) {
        PowerLawFit efit = power_law_fit(err, col, w0, w1);
        c.note(std::string(fc.label) + " eig" + std::to_string(col + 1) +
               " fit: C=" + fmt(efit.coefficient) + " k=" + fmt(efit.exponent) +
               " res=" + fmt(efit.rms_residual));
        c.require(efit.exponent > 0.0, "eigenvalue-error exponent > 0");
        c.require(efit.rms_residual < 0.2, "eigenvalue-error residual < 0.2");
      }
    }
  });

  int selected = 0;  // 0 = all
  if (argc > 1) {
    selected = std::atoi(argv[1]);
    if (selected < 1 || selected > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [criterion 1..%zu]\n", argv[0], criteria.size());
      return 2;
    }
  }

  int failures = 0, ran = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    if (selected != 0 && static_cast<int>(i) + 1 != selected) continue;
    Criterion c{criteria[i].first};
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    std::printf("[%s] %s%s%s\n", c.ok ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.empty() ? "" : " -- ", c.detail.c_str());
    ++ran;
    if (!c.ok) ++failures;
  }
  std::printf("%d criteria run, %d failed\n", ran, failures);
  return failures == 0 ? 0 : 1;
}
