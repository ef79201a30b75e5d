#include "otode/problem_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace otode {

namespace {

using nlohmann::json;

json density_to_json(const Density& density) {
  json j;
  switch (density.kind) {
    case DensityKind::Uniform:
      j["kind"] = "uniform";
      j["params"] = json::object();
      break;
    case DensityKind::GaussianBump:
      j["kind"] = "gaussian_bump";
      j["params"] = {{"rate", density.rate}, {"center", density.center}};
      break;
  }
  return j;
}

Density density_from_json(const json& j) {
  Density density;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") {
    density.kind = DensityKind::Uniform;
  } else if (kind == "gaussian_bump") {
    density.kind = DensityKind::GaussianBump;
    density.rate = j.at("params").at("rate").get<double>();
    density.center = j.at("params").at("center").get<std::vector<double>>();
  } else {
    throw std::invalid_argument("unknown density kind: " + kind);
  }
  return density;
}

}  // namespace

std::string save_problem(const Problem& problem) {
  json j;
  j["dim"] = problem.dim();
  j["lower"] = problem.source.domain.lower;
  j["upper"] = problem.source.domain.upper;
  j["density"] = density_to_json(problem.source.density);
  json points = json::array();
  for (int k = 0; k < problem.num_targets(); ++k) {
    const double* p = problem.target.point(k);
    points.push_back(std::vector<double>(p, p + problem.dim()));
  }
  j["points"] = std::move(points);
  j["weights"] = problem.target.weights;
  j["cost"] = {{"kind", "euclidean_power"}, {"p", problem.cost.exponent}};
  j["label"] = problem.label;
  return j.dump(2);
}

Problem load_problem(const std::string& json_text) {
  json j = json::parse(json_text);
  Problem problem;
  const int dim = j.at("dim").get<int>();
  problem.source.domain.lower = j.at("lower").get<std::vector<double>>();
  problem.source.domain.upper = j.at("upper").get<std::vector<double>>();
  problem.source.density = density_from_json(j.at("density"));
  normalize_source(problem.source);
  problem.target.dim = dim;
  for (const auto& point : j.at("points")) {
    const auto coords = point.get<std::vector<double>>();
    if (static_cast<int>(coords.size()) != dim)
      throw std::invalid_argument("problem spec: point dimension mismatch");
    problem.target.points.insert(problem.target.points.end(), coords.begin(), coords.end());
  }
  problem.target.weights = j.at("weights").get<std::vector<double>>();
  const std::string cost_kind = j.at("cost").at("kind").get<std::string>();
  if (cost_kind != "euclidean_power")
    throw std::invalid_argument("unknown cost kind: " + cost_kind);
  problem.cost.exponent = j.at("cost").at("p").get<double>();
  problem.label = j.value("label", "");
  problem.validate();
  return problem;
}

void save_problem_file(const Problem& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << save_problem(problem) << '\n';
}

Problem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_problem(buffer.str());
}

std::string report_to_json(const SolveReport& report) {
  json j;
  j["status"] = report.converged() ? "converged" : "failed";
  if (!report.failure_reason.empty()) j["failure_reason"] = report.failure_reason;
  j["final_potential"] = report.final_potential.values;
  j["last_time"] = report.last_time;
  if (report.error_sup)
    j["error_sup"] = *report.error_sup;
  else
    j["error_sup"] = nullptr;
  j["measure_error"] = report.measure_error;
  j["wall_seconds"] = report.wall_seconds;
  j["steps"] = report.steps;
  j["final_residual_sup"] = report.final_residual_sup;
  return j.dump(2);
}

}  // namespace otode
