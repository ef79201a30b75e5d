#pragma once

#include <string>

#include "otode/problem.hpp"
#include "otode/report.hpp"

namespace otode {

// JSON problem-spec serialization:
//   {dim, lower, upper, density: {kind, params}, points, weights,
//    cost: {kind, p}, label}
// load(save(P)) reproduces P bit for bit; the density normalization is
// recomputed deterministically at load time.
std::string save_problem(const Problem& problem);
Problem load_problem(const std::string& json_text);

void save_problem_file(const Problem& problem, const std::string& path);
Problem load_problem_file(const std::string& path);

std::string report_to_json(const SolveReport& report);

}  // namespace otode
