#pragma once

#include <vector>

#include "otode/problem.hpp"
#include "otode/quadrature.hpp"

namespace otode {

// Dual vector constrained to zero mean (orthogonal to the ones vector).
struct Potential {
  std::vector<double> values;

  Potential() = default;
  // Validates |sum| <= 1e-10 * N; throws std::invalid_argument otherwise.
  explicit Potential(std::vector<double> v);
  // Projects onto the zero-mean subspace.
  static Potential zero_mean(std::vector<double> v);

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int i) const { return values[i]; }
};

// Symmetric dense matrix, row-major storage.
struct SymmetricMatrix {
  int n = 0;
  std::vector<double> entries;

  SymmetricMatrix() = default;
  explicit SymmetricMatrix(int size) : n(size), entries(static_cast<size_t>(size) * size, 0.0) {}
  double& at(int i, int j) { return entries[static_cast<size_t>(i) * n + j]; }
  double at(int i, int j) const { return entries[static_cast<size_t>(i) * n + j]; }
  double max_abs() const;
  double max_asymmetry() const;
  // throws std::invalid_argument when max_asymmetry exceeds 1e-10*(1+max_abs)
  void check_symmetric() const;
  std::vector<double> multiply(const std::vector<double>& x) const;
};

// Smoothed-cell weights pi(x): the stabilized softmax of
// (psi_k - t c(x,y_k)) / (1-t). Requires t < 1. Writes N weights summing to
// 1 into pi_out and returns logsumexp of the scores. cost_scratch must hold
// N doubles.
double soft_cell_weights_at(const Problem& problem, const double* psi, double t,
                            const double* x, double* pi_out, double* cost_scratch);

std::vector<double> soft_cell_weights(const Problem& problem, const Potential& psi,
                                      double t, const std::vector<double>& x);

// The entropic dual objective under minimization:
//   integral (1-t) logsumexp d rho - sum psi_k mu_k - (1-t).
double dual_value(const Problem& problem, const Potential& psi, double t,
                  const QuadratureSpec& spec);

// Gradient of dual_value: component j is integral pi_j d rho - mu_j.
// Equals smoothed_cell_masses - mu identically.
std::vector<double> dual_gradient(const Problem& problem, const Potential& psi, double t,
                                  const QuadratureSpec& spec);

// integral pi_j d rho; positive entries summing to 1 up to quadrature error.
std::vector<double> smoothed_cell_masses(const Problem& problem, const Potential& psi,
                                         double t, const QuadratureSpec& spec);

// Hessian of dual_value: (1/(1-t)) integral [diag(pi) - pi pi^T] d rho.
// Positive-semidefinite with kernel spanned by the ones vector.
SymmetricMatrix dual_hessian(const Problem& problem, const Potential& psi, double t,
                             const QuadratureSpec& spec);

// Partial derivative in t of dual_gradient at fixed psi, evaluated in the
// overflow-free form (1/(1-t)^2) integral pi_j (g_j - gbar) d rho with
// g_k = psi_k - c(x,y_k) and gbar the pi-weighted mean of g.
std::vector<double> dual_gradient_dt(const Problem& problem, const Potential& psi, double t,
                                     const QuadratureSpec& spec);

}  // namespace otode
