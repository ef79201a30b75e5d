#include "otode/entropic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "otode/cells.hpp"
#include "otode/errors.hpp"

namespace otode {

namespace {

void check_time(double t) {
  if (!(t < 1.0))
    throw std::invalid_argument("continuation time must lie below 1; the t=1 limit "
                                "is handled by the unregularized cell machinery");
}

// Panel seeds around the smoothed-cell interfaces. At time t the score ties
// of (psi_k - t c_k)/(1-t) sit at the Laguerre boundaries of psi/t, and the
// transition layers there have width ~(1-t); a geometric ladder of edges
// around each boundary keeps them visible to the adaptive refinement.
SplitHints boundary_hints(const Problem& problem, const Potential& psi, double t) {
  SplitHints hints;
  if (problem.dim() != 1 || t < 0.5) return hints;
  try {
    std::vector<double> scaled = psi.values;
    for (double& v : scaled) v /= t;
    CellDecomposition1D cells =
        laguerre_partition_1d(problem, Potential::zero_mean(std::move(scaled)));
    const double lo = problem.source.domain.lower[0];
    const double hi = problem.source.domain.upper[0];
    const double width = hi - lo;
    std::vector<double> points;
    for (double b : cells.boundaries) {
      points.push_back(b);
      for (double s = std::max(1e-12, 0.01 * (1.0 - t)); s < 0.5 * width; s *= 4.0) {
        points.push_back(b - s);
        points.push_back(b + s);
      }
    }
    hints.per_axis.push_back(std::move(points));
  } catch (const std::exception&) {
    hints.per_axis.clear();  // hints are an optimization, never a failure source
  }
  return hints;
}

void check_sizes(const Problem& problem, const Potential& psi) {
  if (psi.size() != problem.num_targets())
    throw std::invalid_argument("potential length differs from the number of targets");
}

void require_converged(const IntegralResult& result, const char* what) {
  if (!result.converged)
    throw QuadratureNotConverged(std::string(what) + ": quadrature did not converge",
                                 result.error_estimate);
}

}  // namespace

Potential::Potential(std::vector<double> v) : values(std::move(v)) {
  const double sum = std::accumulate(values.begin(), values.end(), 0.0);
  double scale = 1.0;
  for (double x : values) scale = std::max(scale, std::abs(x));
  if (std::abs(sum) > 1e-10 * scale * static_cast<double>(values.size()))
    throw std::invalid_argument("potential is not zero-mean");
}

Potential Potential::zero_mean(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("potential must not be empty");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
  Potential psi;
  psi.values = std::move(v);
  return psi;
}

double SymmetricMatrix::max_abs() const {
  double m = 0.0;
  for (double v : entries) m = std::max(m, std::abs(v));
  return m;
}

double SymmetricMatrix::max_asymmetry() const {
  double m = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m = std::max(m, std::abs(at(i, j) - at(j, i)));
  return m;
}

void SymmetricMatrix::check_symmetric() const {
  if (max_asymmetry() > 1e-10 * (1.0 + max_abs()))
    throw std::invalid_argument("matrix is not symmetric");
}

std::vector<double> SymmetricMatrix::multiply(const std::vector<double>& x) const {
  std::vector<double> y(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += at(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double soft_cell_weights_at(const Problem& problem, const double* psi, double t,
                            const double* x, double* pi_out, double* cost_scratch) {
  const int n = problem.num_targets();
  const int dim = problem.dim();
  const double inv = 1.0 / (1.0 - t);
  double smax = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    cost_scratch[k] = problem.cost(x, problem.target.point(k), dim);
    const double s = (psi[k] - t * cost_scratch[k]) * inv;
    pi_out[k] = s;
    smax = std::max(smax, s);
  }
  double denom = 0.0;
  for (int k = 0; k < n; ++k) {
    pi_out[k] = std::exp(pi_out[k] - smax);
    denom += pi_out[k];
  }
  for (int k = 0; k < n; ++k) pi_out[k] /= denom;
  return smax + std::log(denom);
}

std::vector<double> soft_cell_weights(const Problem& problem, const Potential& psi,
                                      double t, const std::vector<double>& x) {
  check_time(t);
  check_sizes(problem, psi);
  if (static_cast<int>(x.size()) != problem.dim())
    throw std::invalid_argument("point dimension differs from the problem domain");
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite evaluation point");
  std::vector<double> pi(problem.num_targets()), scratch(problem.num_targets());
  soft_cell_weights_at(problem, psi.values.data(), t, x.data(), pi.data(), scratch.data());
  return pi;
}

double dual_value(const Problem& problem, const Potential& psi, double t,
                  const QuadratureSpec& spec) {
  check_time(t);
  check_sizes(problem, psi);
  const int n = problem.num_targets();
  const SplitHints hints = boundary_hints(problem, psi, t);
  std::vector<double> pi(n), scratch(n);
  auto result = integrate_scalar(
      [&](const double* x) {
        const double lse =
            soft_cell_weights_at(problem, psi.values.data(), t, x, pi.data(), scratch.data());
        return (1.0 - t) * lse * problem.source(x);
      },
      problem.source.domain, spec, &hints);
  require_converged(result, "dual_value");
  double dot = 0.0;
  for (int k = 0; k < n; ++k) dot += psi[k] * problem.target.weights[k];
  return result.value[0] - dot - (1.0 - t);
}

std::vector<double> smoothed_cell_masses(const Problem& problem, const Potential& psi,
                                         double t, const QuadratureSpec& spec) {
  check_time(t);
  check_sizes(problem, psi);
  const int n = problem.num_targets();
  const SplitHints hints = boundary_hints(problem, psi, t);
  std::vector<double> pi(n), scratch(n);
  auto result = integrate(
      [&](const double* x, double* out) {
        soft_cell_weights_at(problem, psi.values.data(), t, x, pi.data(), scratch.data());
        const double rho = problem.source(x);
        for (int k = 0; k < n; ++k) out[k] = pi[k] * rho;
      },
      n, problem.source.domain, spec, &hints);
  require_converged(result, "smoothed_cell_masses");
  return result.value;
}

std::vector<double> dual_gradient(const Problem& problem, const Potential& psi, double t,
                                  const QuadratureSpec& spec) {
  std::vector<double> grad = smoothed_cell_masses(problem, psi, t, spec);
  for (int k = 0; k < problem.num_targets(); ++k) grad[k] -= problem.target.weights[k];
  return grad;
}

SymmetricMatrix dual_hessian(const Problem& problem, const Potential& psi, double t,
                             const QuadratureSpec& spec) {
  check_time(t);
  check_sizes(problem, psi);
  const int n = problem.num_targets();
  const int n_upper = n * (n + 1) / 2;
  const SplitHints hints = boundary_hints(problem, psi, t);
  std::vector<double> pi(n), scratch(n);
  auto result = integrate(
      [&](const double* x, double* out) {
        soft_cell_weights_at(problem, psi.values.data(), t, x, pi.data(), scratch.data());
        const double rho = problem.source(x);
        int c = 0;
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j, ++c)
            out[c] = (i == j ? pi[i] * (1.0 - pi[i]) : -pi[i] * pi[j]) * rho;
      },
      n_upper, problem.source.domain, spec, &hints);
  require_converged(result, "dual_hessian");
  SymmetricMatrix H(n);
  const double inv = 1.0 / (1.0 - t);
  int c = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j, ++c) {
      H.at(i, j) = inv * result.value[c];
      H.at(j, i) = H.at(i, j);
    }
  return H;
}

std::vector<double> dual_gradient_dt(const Problem& problem, const Potential& psi, double t,
                                     const QuadratureSpec& spec) {
  check_time(t);
  check_sizes(problem, psi);
  const int n = problem.num_targets();
  const SplitHints hints = boundary_hints(problem, psi, t);
  std::vector<double> pi(n), cost(n);
  auto result = integrate(
      [&](const double* x, double* out) {
        soft_cell_weights_at(problem, psi.values.data(), t, x, pi.data(), cost.data());
        const double rho = problem.source(x);
        double gbar = 0.0;
        for (int k = 0; k < n; ++k) gbar += pi[k] * (psi[k] - cost[k]);
        for (int k = 0; k < n; ++k) out[k] = pi[k] * ((psi[k] - cost[k]) - gbar) * rho;
      },
      n, problem.source.domain, spec, &hints);
  require_converged(result, "dual_gradient_dt");
  const double inv2 = 1.0 / ((1.0 - t) * (1.0 - t));
  for (double& v : result.value) v *= inv2;
  return result.value;
}

}  // namespace otode
