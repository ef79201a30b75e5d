#pragma once

#include <stdexcept>
#include <string>

namespace otode {

// Integrand produced NaN/Inf, or the integration request itself was invalid.
struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Adaptive refinement hit the subdivision cap before reaching tolerance.
struct QuadratureNotConverged : std::runtime_error {
  QuadratureNotConverged(const std::string& what, double err)
      : std::runtime_error(what), error_estimate(err) {}
  double error_estimate;
};

// System matrix is singular on the zero-mean complement.
struct SingularSystemError : std::runtime_error {
  SingularSystemError(const std::string& what, double lambda_min)
      : std::runtime_error(what), lambda_min_estimate(lambda_min) {}
  double lambda_min_estimate;
};

}  // namespace otode
