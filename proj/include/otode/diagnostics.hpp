#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "otode/linalg.hpp"
#include "otode/ode.hpp"

namespace otode {

// Columnar series over the continuation time. NaN entries mark gaps
// (e.g. quadrature failures); writers emit them as missing values.
struct TraceSeries {
  std::string label;
  std::vector<std::string> columns;
  std::vector<double> t;
  std::vector<std::vector<double>> values;  // one row per t, columns.size() wide

  size_t rows() const { return t.size(); }
};

struct PowerLawFit {
  double coefficient = 0.0;  // C in C (1-t)^k
  double exponent = 0.0;     // k
  double rms_residual = 0.0; // in log-log space
  int samples = 0;
};

struct EigenTraceOptions {
  int every = 1;  // decimation stride over recorded states
};

// Restricted eigenvalues of the dual Hessian along a trajectory. Quadrature
// failures at individual times become NaN rows, not aborts. The final time
// t=1 is skipped (the regularized Hessian is undefined there).
TraceSeries eigen_trace(const Problem& problem, const Trajectory& trajectory,
                        const QuadratureSpec& spec, const EigenTraceOptions& options = {});

// |lambda(t) - lambda*| per eigenvalue column. By default lambda* is the last
// finite row of the series; an explicit reference (e.g. the unregularized
// Hessian spectrum from newton_jacobian_1d) may be supplied instead.
TraceSeries eigen_error_series(const TraceSeries& eigenvalues,
                               const std::vector<double>& lambda_star = {});

// Least squares of log(ordinate) against log(1-t) over the window
// [t_min, t_max]. Requires at least 5 strictly positive finite samples.
PowerLawFit power_law_fit(const TraceSeries& series, int column, double t_min, double t_max);

struct MassTraceOptions {
  int every = 1;
  int raster_resolution = 0;
  QuadratureSpec quad = QuadratureSpec::for_dim(1);
};

// Unregularized cell masses and smoothed masses along the trajectory,
// 2N columns (mass_k then smoothed_k). Smoothed columns are NaN at t=1.
TraceSeries mass_trace(const Problem& problem, const Trajectory& trajectory,
                       const MassTraceOptions& options = {});

// |psi'(t)|_2 per step, read from the trajectory's step records.
TraceSeries rhs_norm_trace(const Trajectory& trajectory);

// Sup-norm difference between two zero-mean potentials of equal length.
double sup_norm_error(const Potential& a, const Potential& b);

void write_csv(const TraceSeries& series, std::ostream& os);
std::string to_json_string(const TraceSeries& series);

}  // namespace otode
