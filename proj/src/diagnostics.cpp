#include "otode/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "otode/errors.hpp"

namespace otode {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TraceSeries eigen_trace(const Problem& problem, const Trajectory& trajectory,
                        const QuadratureSpec& spec, const EigenTraceOptions& options) {
  const int n = problem.num_targets();
  TraceSeries series;
  series.label = "restricted_eigenvalues";
  for (int k = 0; k + 1 < n; ++k)
    series.columns.push_back("lambda_" + std::to_string(k + 1));
  const int stride = std::max(1, options.every);
  for (size_t i = 0; i < trajectory.times.size(); i += stride) {
    const double t = trajectory.times[i];
    if (t >= 1.0) continue;  // the regularized Hessian is undefined at t=1
    series.t.push_back(t);
    try {
      SymmetricMatrix H = dual_hessian(problem, trajectory.potentials[i], t, spec);
      series.values.push_back(restricted_eigenvalues(H));
    } catch (const QuadratureNotConverged&) {
      series.values.emplace_back(n - 1, kNaN);
    }
  }
  return series;
}

TraceSeries eigen_error_series(const TraceSeries& eigenvalues,
                               const std::vector<double>& lambda_star) {
  std::vector<double> ref = lambda_star;
  if (ref.empty()) {
    for (auto it = eigenvalues.values.rbegin(); it != eigenvalues.values.rend(); ++it) {
      bool finite = true;
      for (double v : *it) finite = finite && std::isfinite(v);
      if (finite) {
        ref = *it;
        break;
      }
    }
    if (ref.empty())
      throw std::invalid_argument("eigen_error_series: no finite rows to anchor on");
  }
  if (ref.size() != eigenvalues.columns.size())
    throw std::invalid_argument("eigen_error_series: reference length mismatch");
  TraceSeries out;
  out.label = "eigenvalue_error";
  for (const auto& c : eigenvalues.columns) out.columns.push_back("abs_err_" + c);
  out.t = eigenvalues.t;
  out.values.reserve(eigenvalues.values.size());
  for (const auto& row : eigenvalues.values) {
    std::vector<double> err(row.size());
    for (size_t j = 0; j < row.size(); ++j) err[j] = std::abs(row[j] - ref[j]);
    out.values.push_back(std::move(err));
  }
  return out;
}

PowerLawFit power_law_fit(const TraceSeries& series, int column, double t_min, double t_max) {
  if (column < 0 || column >= static_cast<int>(series.columns.size()))
    throw std::invalid_argument("power_law_fit: column out of range");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < series.t.size(); ++i) {
    const double t = series.t[i];
    const double y = series.values[i][column];
    if (t < t_min || t > t_max || t >= 1.0) continue;
    if (!(y > 0.0) || !std::isfinite(y)) continue;
    lx.push_back(std::log(1.0 - t));
    ly.push_back(std::log(y));
  }
  const int m = static_cast<int>(lx.size());
  if (m < 5)
    throw std::invalid_argument("power_law_fit: need at least 5 positive samples in window");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-300)
    throw std::invalid_argument("power_law_fit: degenerate abscissa");
  const double k = (m * sxy - sx * sy) / denom;
  const double logc = (sy - k * sx) / m;

  double ss = 0.0;
  for (int i = 0; i < m; ++i) {
    const double r = ly[i] - (logc + k * lx[i]);
    ss += r * r;
  }
  PowerLawFit fit;
  fit.coefficient = std::exp(logc);
  fit.exponent = k;
  fit.rms_residual = std::sqrt(ss / m);
  fit.samples = m;
  return fit;
}

TraceSeries mass_trace(const Problem& problem, const Trajectory& trajectory,
                       const MassTraceOptions& options) {
  const int n = problem.num_targets();
  TraceSeries series;
  series.label = "cell_masses";
  for (int k = 0; k < n; ++k) series.columns.push_back("mass_" + std::to_string(k + 1));
  for (int k = 0; k < n; ++k)
    series.columns.push_back("smoothed_" + std::to_string(k + 1));

  CellMassOptions mass_options;
  mass_options.raster_resolution = options.raster_resolution;
  mass_options.quad = options.quad;

  const int stride = std::max(1, options.every);
  for (size_t i = 0; i < trajectory.times.size(); i += stride) {
    const double t = trajectory.times[i];
    const Potential& psi = trajectory.potentials[i];
    series.t.push_back(t);
    std::vector<double> row;
    row.reserve(2 * n);
    std::vector<double> hard = cell_masses(problem, psi, mass_options);
    row.insert(row.end(), hard.begin(), hard.end());
    if (t < 1.0) {
      try {
        std::vector<double> smooth = smoothed_cell_masses(problem, psi, t, options.quad);
        row.insert(row.end(), smooth.begin(), smooth.end());
      } catch (const QuadratureNotConverged&) {
        row.insert(row.end(), n, kNaN);
      }
    } else {
      row.insert(row.end(), n, kNaN);
    }
    series.values.push_back(std::move(row));
  }
  return series;
}

TraceSeries rhs_norm_trace(const Trajectory& trajectory) {
  TraceSeries series;
  series.label = "rhs_norm";
  series.columns = {"rhs_norm"};
  for (const StepRecord& rec : trajectory.step_records) {
    series.t.push_back(rec.t);
    series.values.push_back({rec.rhs_norm});
  }
  return series;
}

double sup_norm_error(const Potential& a, const Potential& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_norm_error: length mismatch");
  double err = 0.0;
  for (int i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
  return err;
}

void write_csv(const TraceSeries& series, std::ostream& os) {
  os << "t";
  for (const auto& c : series.columns) os << ',' << c;
  os << '\n';
  os.precision(17);
  for (size_t i = 0; i < series.t.size(); ++i) {
    os << series.t[i];
    for (double v : series.values[i]) {
      os << ',';
      if (std::isfinite(v)) os << v;  // missing values stay empty
    }
    os << '\n';
  }
}

std::string to_json_string(const TraceSeries& series) {
  nlohmann::json j;
  j["label"] = series.label;
  j["columns"] = series.columns;
  j["t"] = series.t;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : series.values) {
    nlohmann::json r = nlohmann::json::array();
    for (double v : row) {
      if (std::isfinite(v))
        r.push_back(v);
      else
        r.push_back(nullptr);
    }
    rows.push_back(std::move(r));
  }
  j["values"] = std::move(rows);
  return j.dump(2);
}

}  // namespace otode
