// Command-line front end: solves the builtin or user-supplied instances,
// sweeps meshes, runs the Newton baseline ladder, and emits trace CSVs and
// power-law fits of the decay diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "otode/cells.hpp"
#include "otode/diagnostics.hpp"
#include "otode/newton.hpp"
#include "otode/ode.hpp"
#include "otode/problem_io.hpp"

using namespace otode;
using nlohmann::json;

namespace {

struct ProblemOptions {
  std::string example;
  std::string spec_path;
  std::string random;  // "dim,N"
  double b = 0.5;      // E4 parameter
  double p = 0.0;      // 0 = keep the instance's own cost exponent
  std::uint64_t seed = 12345;

  void attach(CLI::App* cmd) {
    cmd->add_option("--example", example, "builtin instance id (E0..E7)");
    cmd->add_option("--spec", spec_path, "problem-spec JSON file");
    cmd->add_option("--random", random,
                    "seeded random instance as dim,N (uniform source, unit box)");
    cmd->add_option("--b", b, "E4 shape parameter in (0,1)")->check(CLI::Range(1e-9, 1.0));
    cmd->add_option("--p", p, "override the cost exponent (>= 2)");
    cmd->add_option("--seed", seed, "seed for random instances and random guesses");
  }

  Problem build() const {
    int sources = 0;
    sources += !example.empty();
    sources += !spec_path.empty();
    sources += !random.empty();
    if (sources != 1)
      throw CLI::ValidationError("exactly one of --example/--spec/--random is required");
    Problem problem;
    if (!example.empty()) {
      problem = example == "E4" ? builtin_example("E4", {b}) : builtin_example(example);
    } else if (!spec_path.empty()) {
      problem = load_problem_file(spec_path);
    } else {
      int dim = 0, n = 0;
      if (std::sscanf(random.c_str(), "%d,%d", &dim, &n) != 2)
        throw CLI::ValidationError("--random expects dim,N");
      problem = random_problem(dim, n, seed);
    }
    if (p != 0.0) {
      problem.cost.exponent = p;
      problem.validate();
    }
    return problem;
  }

  // Reference potential for error reporting: the closed form when the cost
  // is the instance's own, the 1-d construction otherwise, nothing in 2-d/3-d.
  std::optional<Potential> reference(const Problem& problem) const {
    if (!example.empty() && p == 0.0) {
      auto exact = exact_solution(example, example == "E4" ? std::vector<double>{b}
                                                           : std::vector<double>{});
      if (exact) return Potential::zero_mean(*exact);
    }
    if (problem.dim() == 1) return exact_potential_1d(problem);
    return std::nullopt;
  }
};

struct OutputOptions {
  std::string format = "json";
  std::string out;

  void attach(CLI::App* cmd) {
    cmd->add_option("--format", format, "output format (csv or json)")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", out, "output path (stdout when omitted)");
  }

  void write(const std::string& text) const {
    if (out.empty()) {
      std::cout << text << '\n';
    } else {
      std::ofstream file(out);
      if (!file) throw std::runtime_error("cannot open for writing: " + out);
      file << text << '\n';
    }
  }
};

std::vector<double> parse_dt_list(const std::string& text) {
  std::vector<double> dts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) dts.push_back(std::stod(item));
  }
  if (dts.empty()) throw CLI::ValidationError("--dt expects a comma-separated list");
  return dts;
}

json report_json(const SolveReport& report) { return json::parse(report_to_json(report)); }

// Failed runs print the literal NAN token; a value that is merely unknown
// (no reference potential) stays an empty field.
std::string table_cell(const std::optional<double>& v, bool failed) {
  if (failed) return "NAN";
  if (!v || !std::isfinite(*v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6e", *v);
  return buf;
}

std::string seconds_str(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", s);
  return buf;
}

Potential random_guess(int n, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = scale * u(rng);
  return Potential::zero_mean(std::move(v));
}

struct SweepRow {
  double dt = 0.0;
  SolveReport report;
};

int cmd_solve(const ProblemOptions& popt, const OutputOptions& oopt, double dt,
              double alpha, double beta, double quad_rtol, int raster_res,
              const std::string& trace_out, const std::string& raster_out,
              int record_every) {
  Problem problem = popt.build();
  SolveOptions options;
  options.quad = QuadratureSpec::for_dim(problem.dim());
  if (quad_rtol > 0.0) options.quad.rel_tol = quad_rtol;
  options.raster_resolution = raster_res;
  options.reference = popt.reference(problem);
  options.hooks.record_every = record_every;
  SolveResult result = solve_ivp(problem, dt, make_tableau(alpha, beta), options);

  if (!trace_out.empty()) {
    TraceSeries series;
    series.label = "trajectory";
    for (int k = 0; k < problem.num_targets(); ++k)
      series.columns.push_back("psi_" + std::to_string(k + 1));
    series.t = result.trajectory.times;
    for (const Potential& psi : result.trajectory.potentials)
      series.values.push_back(psi.values);
    std::ofstream file(trace_out);
    if (!file) throw std::runtime_error("cannot open for writing: " + trace_out);
    write_csv(series, file);
  }
  if (!raster_out.empty() && problem.dim() >= 2) {
    RasterGrid grid = rasterize_cells(problem, result.report.final_potential,
                                      raster_res > 0 ? raster_res : 0);
    std::ofstream file(raster_out);
    if (!file) throw std::runtime_error("cannot open for writing: " + raster_out);
    write_raster_labels(grid, file);
  }

  json j = report_json(result.report);
  j["label"] = problem.label;
  j["dt"] = dt;
  oopt.write(j.dump(2));
  return result.report.converged() ? 0 : 1;
}

int cmd_newton(const ProblemOptions& popt, const OutputOptions& oopt,
               std::optional<double> guess_scale, double tol, int max_iters,
               double fd_step, int raster_res) {
  Problem problem = popt.build();
  NewtonConfig config;
  config.tol = tol;
  config.max_iters = max_iters;
  config.fd_step = fd_step;
  config.raster_resolution = raster_res;
  config.quad = QuadratureSpec::for_dim(1);
  config.reference = popt.reference(problem);
  const int n = problem.num_targets();

  if (guess_scale) {
    Potential psi0 = *guess_scale == 0.0
                         ? Potential::zero_mean(std::vector<double>(n, 0.0))
                         : random_guess(n, *guess_scale, popt.seed);
    SolveReport report = newton_solve(problem, psi0, config);
    json j = report_json(report);
    j["label"] = problem.label;
    j["guess_scale"] = *guess_scale;
    oopt.write(j.dump(2));
    return report.converged() ? 0 : 1;
  }

  // Initial-guess scaling ladder: 10, 1, 0.1, 0.01, 0 times rand(N).
  const double scales[5] = {10.0, 1.0, 0.1, 0.01, 0.0};
  std::vector<SolveReport> reports;
  for (double scale : scales) {
    Potential psi0 = scale == 0.0 ? Potential::zero_mean(std::vector<double>(n, 0.0))
                                  : random_guess(n, scale, popt.seed);
    reports.push_back(newton_solve(problem, psi0, config));
  }

  int exit_code = reports.back().converged() ? 0 : 1;  // the deterministic rung
  if (oopt.format == "csv") {
    std::ostringstream os;
    os << "guess_scale,error,measure_error,iterations,seconds,status\n";
    for (int i = 0; i < 5; ++i) {
      const SolveReport& r = reports[i];
      os << scales[i] << ',' << table_cell(r.error_sup, !r.converged()) << ','
         << table_cell(r.measure_error, !r.converged()) << ',' << r.steps << ','
         << seconds_str(r.wall_seconds) << ',' << (r.converged() ? "ok" : "NAN") << '\n';
    }
    oopt.write(os.str());
  } else {
    json rows = json::array();
    for (int i = 0; i < 5; ++i) {
      json j = report_json(reports[i]);
      j["guess_scale"] = scales[i];
      rows.push_back(std::move(j));
    }
    json j;
    j["label"] = problem.label;
    j["ladder"] = std::move(rows);
    oopt.write(j.dump(2));
  }
  return exit_code;
}

int cmd_sweep(const ProblemOptions& popt, const OutputOptions& oopt,
              const std::string& dt_list, double alpha, double beta, double quad_rtol,
              int raster_res, int jobs) {
  Problem problem = popt.build();
  std::vector<double> dts = parse_dt_list(dt_list);
  std::optional<Potential> reference = popt.reference(problem);

  auto solve_one = [&](double dt) {
    SolveOptions options;
    options.quad = QuadratureSpec::for_dim(problem.dim());
    if (quad_rtol > 0.0) options.quad.rel_tol = quad_rtol;
    options.raster_resolution = raster_res;
    options.reference = reference;
    SweepRow row;
    row.dt = dt;
    row.report = solve_ivp(problem, dt, make_tableau(alpha, beta), options).report;
    return row;
  };

  std::vector<SweepRow> rows(dts.size());
  if (jobs <= 1) {
    for (size_t i = 0; i < dts.size(); ++i) rows[i] = solve_one(dts[i]);
  } else {
    std::vector<std::future<SweepRow>> futures;
    futures.reserve(dts.size());
    for (double dt : dts)
      futures.push_back(std::async(std::launch::async, solve_one, dt));
    for (size_t i = 0; i < futures.size(); ++i) rows[i] = futures[i].get();
  }

  bool all_ok = true;
  for (const SweepRow& row : rows) all_ok = all_ok && row.report.converged();

  if (oopt.format == "csv") {
    std::ostringstream os;
    os << "dt,error,measure_error,seconds,status\n";
    for (const SweepRow& row : rows) {
      const bool failed = !row.report.converged();
      os << row.dt << ',' << table_cell(row.report.error_sup, failed) << ','
         << table_cell(row.report.measure_error, failed) << ','
         << seconds_str(row.report.wall_seconds) << ',' << (failed ? "NAN" : "ok")
         << '\n';
    }
    oopt.write(os.str());
  } else {
    json out = json::array();
    for (const SweepRow& row : rows) {
      json j = report_json(row.report);
      j["dt"] = row.dt;
      out.push_back(std::move(j));
    }
    json wrapper;
    wrapper["label"] = problem.label;
    wrapper["rows"] = std::move(out);
    oopt.write(wrapper.dump(2));
  }
  return all_ok ? 0 : 1;
}

int cmd_trace(const ProblemOptions& popt, const OutputOptions& oopt, double dt,
              double alpha, double beta, double quad_rtol, int raster_res,
              const std::string& fit_window, int every) {
  Problem problem = popt.build();
  SolveOptions options;
  options.quad = QuadratureSpec::for_dim(problem.dim());
  if (quad_rtol > 0.0) options.quad.rel_tol = quad_rtol;
  options.raster_resolution = raster_res;
  options.hooks.record_every = 1;
  options.reference = popt.reference(problem);
  SolveResult result = solve_ivp(problem, dt, make_tableau(alpha, beta), options);

  double w0 = 0.5, w1 = 1.0 - dt;
  if (!fit_window.empty() &&
      std::sscanf(fit_window.c_str(), "%lf,%lf", &w0, &w1) != 2)
    throw CLI::ValidationError("--fit-window expects t0,t1");

  const std::string prefix = oopt.out.empty() ? problem.label : oopt.out;
  auto dump = [&](const TraceSeries& series, const std::string& suffix) {
    std::ofstream file(prefix + "_" + suffix + ".csv");
    if (!file) throw std::runtime_error("cannot write " + prefix + "_" + suffix + ".csv");
    write_csv(series, file);
  };

  EigenTraceOptions eopts;
  eopts.every = std::max(1, every);
  TraceSeries eig = eigen_trace(problem, result.trajectory, options.quad, eopts);
  dump(eig, "eig");

  MassTraceOptions mopts;
  mopts.every = std::max(1, every);
  mopts.raster_resolution = raster_res;
  mopts.quad = options.quad;
  TraceSeries masses = mass_trace(problem, result.trajectory, mopts);
  dump(masses, "mass");

  TraceSeries rhs = rhs_norm_trace(result.trajectory);
  dump(rhs, "rhs");

  json fits = json::array();
  auto try_fit = [&](const TraceSeries& series, int column, const std::string& name) {
    try {
      PowerLawFit fit = power_law_fit(series, column, w0, w1);
      fits.push_back({{"series", name},
                      {"coefficient", fit.coefficient},
                      {"exponent", fit.exponent},
                      {"rms_residual", fit.rms_residual},
                      {"samples", fit.samples}});
    } catch (const std::exception& e) {
      fits.push_back({{"series", name}, {"error", e.what()}});
    }
  };
  try_fit(rhs, 0, "rhs_norm");
  TraceSeries eig_err = eigen_error_series(eig);
  for (int col = 0; col < static_cast<int>(eig_err.columns.size()); ++col)
    try_fit(eig_err, col, eig_err.columns[col]);

  json j;
  j["label"] = problem.label;
  j["status"] = result.report.converged() ? "converged" : "failed";
  j["fit_window"] = {w0, w1};
  j["fits"] = std::move(fits);
  j["files"] = {prefix + "_eig.csv", prefix + "_mass.csv", prefix + "_rhs.csv"};
  std::cout << j.dump(2) << '\n';
  return result.report.converged() ? 0 : 1;
}

int cmd_compare(const ProblemOptions& popt, const OutputOptions& oopt, double dt,
                double alpha, double beta, double quad_rtol, int raster_res, double tol,
                int max_iters, double fd_step) {
  Problem problem = popt.build();
  SolveOptions options;
  options.quad = QuadratureSpec::for_dim(problem.dim());
  if (quad_rtol > 0.0) options.quad.rel_tol = quad_rtol;
  options.raster_resolution = raster_res;
  options.reference = popt.reference(problem);
  SolveResult ode = solve_ivp(problem, dt, make_tableau(alpha, beta), options);

  NewtonConfig config;
  config.tol = tol;
  config.max_iters = max_iters;
  config.fd_step = fd_step;
  config.raster_resolution = raster_res;
  config.reference = options.reference;
  SolveReport newton = newton_solve(
      problem, Potential::zero_mean(std::vector<double>(problem.num_targets(), 0.0)),
      config);

  json j;
  j["label"] = problem.label;
  j["dt"] = dt;
  j["ode"] = report_json(ode.report);
  j["newton"] = report_json(newton);
  oopt.write(j.dump(2));
  return ode.report.converged() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-discrete optimal transport by continuation in the regularization "
               "parameter, with a Newton baseline"};
  app.require_subcommand(1);

  ProblemOptions popt;
  OutputOptions oopt;
  double dt = 1e-2, alpha = 0.125, beta = 0.25, quad_rtol = 0.0;
  int raster_res = 0, jobs = 1, record_every = 1, every = 1, max_iters = 100;
  double tol = 1e-12, fd_step = 1e-5;
  std::string dt_list, trace_out, raster_out, fit_window;
  std::optional<double> guess_scale;

  auto add_common = [&](CLI::App* cmd, bool with_tableau) {
    popt.attach(cmd);
    oopt.attach(cmd);
    if (with_tableau) {
      cmd->add_option("--alpha", alpha, "RK3 family parameter");
      cmd->add_option("--beta", beta, "RK3 family parameter");
      cmd->add_option("--quad-rtol", quad_rtol, "quadrature relative tolerance");
    }
    cmd->add_option("--raster-res", raster_res, "raster resolution per axis (2-d/3-d)");
  };

  CLI::App* solve = app.add_subcommand("solve", "integrate the continuation IVP");
  add_common(solve, true);
  solve->add_option("--dt", dt, "fixed step size, 1/dt integer");
  solve->add_option("--trace-out", trace_out, "write the trajectory CSV here");
  solve->add_option("--raster-out", raster_out, "write final cell labels here (2-d/3-d)");
  solve->add_option("--record-every", record_every, "step-record stride");

  CLI::App* newton = app.add_subcommand("newton", "Newton baseline");
  add_common(newton, false);
  newton->add_option("--guess-scale", guess_scale,
                     "single run with psi0 = scale * rand(N); omit for the "
                     "10,1,0.1,0.01,0 ladder");
  newton->add_option("--tol", tol, "residual sup-norm tolerance");
  newton->add_option("--max-iters", max_iters, "iteration cap");
  newton->add_option("--fd-step", fd_step, "FD Jacobian step (2-d/3-d)");

  CLI::App* sweep = app.add_subcommand("sweep", "one table row per step size");
  add_common(sweep, true);
  sweep->add_option("--dt", dt_list, "comma-separated step sizes")->required();
  sweep->add_option("--jobs", jobs, "concurrent solves");

  CLI::App* trace = app.add_subcommand("trace", "trace series and power-law fits");
  add_common(trace, true);
  trace->add_option("--dt", dt, "fixed step size");
  trace->add_option("--fit-window", fit_window, "fit window as t0,t1");
  trace->add_option("--every", every, "trace decimation stride");

  CLI::App* compare = app.add_subcommand("compare", "continuation vs Newton");
  add_common(compare, true);
  compare->add_option("--dt", dt, "fixed step size");
  compare->add_option("--tol", tol, "Newton tolerance");
  compare->add_option("--max-iters", max_iters, "Newton iteration cap");
  compare->add_option("--fd-step", fd_step, "Newton FD step (2-d/3-d)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return cmd_solve(popt, oopt, dt, alpha, beta, quad_rtol, raster_res, trace_out,
                       raster_out, record_every);
    if (newton->parsed())
      return cmd_newton(popt, oopt, guess_scale, tol, max_iters, fd_step, raster_res);
    if (sweep->parsed())
      return cmd_sweep(popt, oopt, dt_list, alpha, beta, quad_rtol, raster_res, jobs);
    if (trace->parsed())
      return cmd_trace(popt, oopt, dt, alpha, beta, quad_rtol, raster_res, fit_window,
                       every);
    if (compare->parsed())
      return cmd_compare(popt, oopt, dt, alpha, beta, quad_rtol, raster_res, tol,
                         max_iters, fd_step);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
