#pragma once

#include <optional>
#include <string>
#include <vector>

#include "otode/entropic.hpp"

namespace otode {

enum class SolveStatus { Converged, Failed };

// Outcome of a continuation or Newton solve. A Failed status is a structured
// result (it becomes a NAN table cell), not an exception: final_potential
// holds the last good iterate and last_time how far the march got.
struct SolveReport {
  SolveStatus status = SolveStatus::Failed;
  std::string failure_reason;
  Potential final_potential;
  double last_time = 0.0;  // 1.0 for a completed continuation
  std::optional<double> error_sup;  // vs exact/reference potential, when known
  double measure_error = 0.0;       // |cell_masses(final) - mu|_inf
  double wall_seconds = 0.0;
  int steps = 0;                           // ODE steps or Newton iterations
  double final_residual_sup = 0.0;         // Newton only
  std::vector<double> residual_history;    // Newton only

  bool converged() const { return status == SolveStatus::Converged; }
};

}  // namespace otode
