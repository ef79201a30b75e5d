#pragma once

#include <functional>
#include <vector>

#include "otode/problem.hpp"

namespace otode {

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  // Total number of panel bisections allowed.
  int max_subdivisions = 1 << 14;
  // Points per axis per panel: 15 (Gauss 7 / Kronrod 15) or 21 (Gauss 10 /
  // Kronrod 21).
  int base_rule_order = 15;

  void validate() const;
  static QuadratureSpec for_dim(int dim);
};

struct IntegralResult {
  std::vector<double> value;
  double error_estimate = 0.0;
  bool converged = false;
  long long evaluations = 0;
};

// Writes n_components values at x into out.
using VectorIntegrand = std::function<void(const double* x, double* out)>;

// Per-axis coordinates where the initial panels are pre-split. A narrow
// feature (e.g. a boundary layer of width 1-t) sitting far from every node
// of a coarse panel is invisible to the error estimate; seeding panel edges
// at its known location lets the adaptive refinement find it.
struct SplitHints {
  std::vector<std::vector<double>> per_axis;
};

// Adaptive panel integration over a box. Panels are bisected along their
// widest axis, worst local error first, until the summed error estimate
// drops below max(abs_tol, rel_tol * |value|_inf) or the subdivision budget
// runs out (converged = false, value still returned). All components share
// the panel decisions; the local error is the max over components.
// NaN/Inf from the integrand throws QuadratureError.
IntegralResult integrate(const VectorIntegrand& f, int n_components,
                         const BoxDomain& domain, const QuadratureSpec& spec,
                         const SplitHints* hints = nullptr);

IntegralResult integrate_scalar(const std::function<double(const double*)>& f,
                                const BoxDomain& domain, const QuadratureSpec& spec,
                                const SplitHints* hints = nullptr);

}  // namespace otode
