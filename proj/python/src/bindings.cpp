#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "otode/cells.hpp"
#include "otode/diagnostics.hpp"
#include "otode/linalg.hpp"
#include "otode/newton.hpp"
#include "otode/ode.hpp"
#include "otode/problem_io.hpp"

namespace py = pybind11;
using namespace otode;

namespace {

Potential as_potential(const std::vector<double>& values) {
  return Potential::zero_mean(values);
}

SymmetricMatrix as_matrix(const std::vector<std::vector<double>>& rows) {
  const int n = static_cast<int>(rows.size());
  SymmetricMatrix m(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n)
      throw std::invalid_argument("matrix must be square");
    for (int j = 0; j < n; ++j) m.at(i, j) = rows[i][j];
  }
  return m;
}

std::vector<std::vector<double>> matrix_rows(const SymmetricMatrix& m) {
  std::vector<std::vector<double>> rows(m.n, std::vector<double>(m.n));
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) rows[i][j] = m.at(i, j);
  return rows;
}

py::dict report_dict(const SolveReport& report) {
  py::dict d;
  d["status"] = report.converged() ? "converged" : "failed";
  d["failure_reason"] = report.failure_reason;
  d["final_potential"] = report.final_potential.values;
  d["last_time"] = report.last_time;
  if (report.error_sup)
    d["error_sup"] = *report.error_sup;
  else
    d["error_sup"] = py::none();
  d["measure_error"] = report.measure_error;
  d["wall_seconds"] = report.wall_seconds;
  d["steps"] = report.steps;
  d["final_residual_sup"] = report.final_residual_sup;
  d["residual_history"] = report.residual_history;
  return d;
}

}  // namespace

PYBIND11_MODULE(_otode, m) {
  m.doc() = "Semi-discrete optimal transport solved by continuation in the "
            "regularization parameter.";

  py::class_<Problem>(m, "Problem")
      .def_property_readonly("label", [](const Problem& p) { return p.label; })
      .def_property_readonly("dim", &Problem::dim)
      .def_property_readonly("num_targets", &Problem::num_targets)
      .def_property_readonly("weights", [](const Problem& p) { return p.target.weights; })
      .def_property_readonly("points",
                             [](const Problem& p) {
                               std::vector<std::vector<double>> pts;
                               for (int k = 0; k < p.num_targets(); ++k) {
                                 const double* q = p.target.point(k);
                                 pts.emplace_back(q, q + p.dim());
                               }
                               return pts;
                             })
      .def_property_readonly("cost_exponent",
                             [](const Problem& p) { return p.cost.exponent; })
      .def("with_cost_exponent",
           [](const Problem& p, double exponent) {
             Problem q = p;
             q.cost.exponent = exponent;
             q.validate();
             return q;
           })
      .def("__repr__", [](const Problem& p) {
        return "<Problem " + p.label + " dim=" + std::to_string(p.dim()) +
               " N=" + std::to_string(p.num_targets()) + ">";
      });

  py::class_<QuadratureSpec>(m, "QuadratureSpec")
      .def(py::init<>())
      .def_static("for_dim", &QuadratureSpec::for_dim)
      .def_readwrite("rel_tol", &QuadratureSpec::rel_tol)
      .def_readwrite("abs_tol", &QuadratureSpec::abs_tol)
      .def_readwrite("max_subdivisions", &QuadratureSpec::max_subdivisions)
      .def_readwrite("base_rule_order", &QuadratureSpec::base_rule_order);

  py::class_<RK3Tableau>(m, "RK3Tableau")
      .def_readonly("alpha", &RK3Tableau::alpha)
      .def_readonly("beta", &RK3Tableau::beta)
      .def_readonly("a21", &RK3Tableau::a21)
      .def_readonly("a31", &RK3Tableau::a31)
      .def_readonly("a32", &RK3Tableau::a32)
      .def_readonly("b1", &RK3Tableau::b1)
      .def_readonly("b2", &RK3Tableau::b2)
      .def_readonly("b3", &RK3Tableau::b3)
      .def_readonly("c2", &RK3Tableau::c2)
      .def_readonly("c3", &RK3Tableau::c3)
      .def("order_condition_residuals", [](const RK3Tableau& tb) {
        const auto r = tb.order_condition_residuals();
        return std::vector<double>(r.begin(), r.end());
      });

  m.def("builtin_example", &builtin_example, py::arg("id"),
        py::arg("params") = std::vector<double>{});
  m.def("exact_solution", &exact_solution, py::arg("id"),
        py::arg("params") = std::vector<double>{});
  m.def("random_problem", &random_problem, py::arg("dim"), py::arg("n_points"),
        py::arg("seed"));
  m.def("load_problem", &load_problem_file, py::arg("path"));
  m.def("save_problem", &save_problem_file, py::arg("problem"), py::arg("path"));
  m.def("problem_json", &save_problem, py::arg("problem"));

  m.def("make_tableau", &make_tableau, py::arg("alpha"), py::arg("beta"));
  m.def("initial_potential",
        [](const std::vector<double>& w) { return initial_potential(w).values; });

  m.def(
      "soft_cell_weights",
      [](const Problem& p, const std::vector<double>& psi, double t,
         const std::vector<double>& x) {
        return soft_cell_weights(p, as_potential(psi), t, x);
      },
      py::arg("problem"), py::arg("psi"), py::arg("t"), py::arg("x"));
  m.def(
      "dual_value",
      [](const Problem& p, const std::vector<double>& psi, double t,
         std::optional<QuadratureSpec> spec) {
        return dual_value(p, as_potential(psi), t,
                          spec ? *spec : QuadratureSpec::for_dim(p.dim()));
      },
      py::arg("problem"), py::arg("psi"), py::arg("t"), py::arg("spec") = py::none());
  m.def(
      "dual_gradient",
      [](const Problem& p, const std::vector<double>& psi, double t,
         std::optional<QuadratureSpec> spec) {
        return dual_gradient(p, as_potential(psi), t,
                             spec ? *spec : QuadratureSpec::for_dim(p.dim()));
      },
      py::arg("problem"), py::arg("psi"), py::arg("t"), py::arg("spec") = py::none());
  m.def(
      "dual_hessian",
      [](const Problem& p, const std::vector<double>& psi, double t,
         std::optional<QuadratureSpec> spec) {
        return matrix_rows(dual_hessian(p, as_potential(psi), t,
                                        spec ? *spec : QuadratureSpec::for_dim(p.dim())));
      },
      py::arg("problem"), py::arg("psi"), py::arg("t"), py::arg("spec") = py::none());
  m.def(
      "dual_gradient_dt",
      [](const Problem& p, const std::vector<double>& psi, double t,
         std::optional<QuadratureSpec> spec) {
        return dual_gradient_dt(p, as_potential(psi), t,
                                spec ? *spec : QuadratureSpec::for_dim(p.dim()));
      },
      py::arg("problem"), py::arg("psi"), py::arg("t"), py::arg("spec") = py::none());
  m.def(
      "smoothed_cell_masses",
      [](const Problem& p, const std::vector<double>& psi, double t,
         std::optional<QuadratureSpec> spec) {
        return smoothed_cell_masses(p, as_potential(psi), t,
                                    spec ? *spec : QuadratureSpec::for_dim(p.dim()));
      },
      py::arg("problem"), py::arg("psi"), py::arg("t"), py::arg("spec") = py::none());

  m.def(
      "cell_masses",
      [](const Problem& p, const std::vector<double>& psi, int raster_resolution) {
        CellMassOptions options;
        options.raster_resolution = raster_resolution;
        return cell_masses(p, as_potential(psi), options);
      },
      py::arg("problem"), py::arg("psi"), py::arg("raster_resolution") = 0);
  m.def(
      "exact_potential_1d",
      [](const Problem& p) { return exact_potential_1d(p).values; },
      py::arg("problem"));

  m.def(
      "projected_solve",
      [](const std::vector<std::vector<double>>& h, const std::vector<double>& b) {
        return projected_solve(as_matrix(h), b);
      },
      py::arg("hessian"), py::arg("b"));
  m.def(
      "restricted_eigenvalues",
      [](const std::vector<std::vector<double>>& h) {
        return restricted_eigenvalues(as_matrix(h));
      },
      py::arg("hessian"));

  m.def(
      "solve_ivp",
      [](const Problem& p, double dt, double alpha, double beta,
         std::optional<QuadratureSpec> spec, std::optional<std::vector<double>> reference,
         int record_every, bool record_lambda_min, int raster_resolution) {
        SolveOptions options;
        options.quad = spec ? *spec : QuadratureSpec::for_dim(p.dim());
        options.hooks.record_every = record_every;
        options.hooks.record_lambda_min = record_lambda_min;
        options.raster_resolution = raster_resolution;
        if (reference) options.reference = as_potential(*reference);
        SolveResult result = solve_ivp(p, dt, make_tableau(alpha, beta), options);
        py::dict d;
        d["report"] = report_dict(result.report);
        d["times"] = result.trajectory.times;
        std::vector<std::vector<double>> path;
        for (const Potential& psi : result.trajectory.potentials)
          path.push_back(psi.values);
        d["potentials"] = path;
        std::vector<double> rhs_norms;
        for (const StepRecord& rec : result.trajectory.step_records)
          rhs_norms.push_back(rec.rhs_norm);
        d["rhs_norms"] = rhs_norms;
        return d;
      },
      py::arg("problem"), py::arg("dt"), py::arg("alpha") = 0.125,
      py::arg("beta") = 0.25, py::arg("spec") = py::none(),
      py::arg("reference") = py::none(), py::arg("record_every") = 1,
      py::arg("record_lambda_min") = false, py::arg("raster_resolution") = 0);

  m.def(
      "newton_solve",
      [](const Problem& p, std::optional<std::vector<double>> psi0, double tol,
         int max_iters, double fd_step, int raster_resolution,
         std::optional<std::vector<double>> reference) {
        NewtonConfig config;
        config.tol = tol;
        config.max_iters = max_iters;
        config.fd_step = fd_step;
        config.raster_resolution = raster_resolution;
        if (reference) config.reference = as_potential(*reference);
        Potential start = psi0 ? as_potential(*psi0)
                               : Potential::zero_mean(
                                     std::vector<double>(p.num_targets(), 0.0));
        return report_dict(newton_solve(p, start, config));
      },
      py::arg("problem"), py::arg("psi0") = py::none(), py::arg("tol") = 1e-12,
      py::arg("max_iters") = 100, py::arg("fd_step") = 1e-5,
      py::arg("raster_resolution") = 0, py::arg("reference") = py::none());
}
