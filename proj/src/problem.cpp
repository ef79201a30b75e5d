#include "otode/problem.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "otode/quadrature.hpp"

namespace otode {

double BoxDomain::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= upper[i] - lower[i];
  return v;
}

void BoxDomain::validate() const {
  if (lower.size() != upper.size())
    throw std::invalid_argument("BoxDomain: lower/upper length mismatch");
  if (dim() < 1 || dim() > 3)
    throw std::invalid_argument("BoxDomain: dim must be 1, 2 or 3");
  for (int i = 0; i < dim(); ++i)
    if (!(lower[i] < upper[i]))
      throw std::invalid_argument("BoxDomain: lower[i] < upper[i] required");
}

double Density::shape(const double* x, int dim) const {
  switch (kind) {
    case DensityKind::Uniform:
      return 1.0;
    case DensityKind::GaussianBump: {
      double r2 = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double d = x[i] - center[i];
        r2 += d * d;
      }
      return std::exp(-rate * r2);
    }
  }
  return 1.0;
}

double TargetMeasure::min_weight() const {
  return *std::min_element(weights.begin(), weights.end());
}

void TargetMeasure::validate() const {
  if (size() < 2) throw std::invalid_argument("TargetMeasure: at least 2 points required");
  if (points.size() != static_cast<size_t>(size()) * dim)
    throw std::invalid_argument("TargetMeasure: points/weights size mismatch");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("TargetMeasure: weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("TargetMeasure: weights must sum to 1");
}

double CostFunction::operator()(const double* x, const double* y, int dim) const {
  double r2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = x[i] - y[i];
    r2 += d * d;
  }
  if (exponent == 2.0) return r2;
  return std::pow(r2, 0.5 * exponent);
}

double CostFunction::grad_1d(double x, double y) const {
  const double d = x - y;
  if (exponent == 2.0) return 2.0 * d;
  if (d == 0.0) return 0.0;
  return exponent * std::pow(std::abs(d), exponent - 1.0) * (d > 0 ? 1.0 : -1.0);
}

void Problem::validate() const {
  source.domain.validate();
  target.validate();
  if (target.dim != dim())
    throw std::invalid_argument("Problem: target dimension differs from domain");
  if (cost.exponent < 2.0)
    throw std::invalid_argument("Problem: cost exponent must be >= 2");
}

void normalize_source(SourceMeasure& source) {
  if (source.density.kind == DensityKind::Uniform) {
    source.normalization = 1.0 / source.domain.volume();
    return;
  }
  const Density& density = source.density;
  const int dim = source.domain.dim();
  auto spec = QuadratureSpec::for_dim(dim);
  spec.rel_tol = std::min(spec.rel_tol, 1e-12);
  auto mass = integrate_scalar([&](const double* x) { return density.shape(x, dim); },
                               source.domain, spec);
  source.normalization = 1.0 / mass.value[0];
}

double cost_eval(const CostFunction& cost, const std::vector<double>& x,
                 const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("cost_eval: dimension mismatch");
  return cost(x.data(), y.data(), static_cast<int>(x.size()));
}

namespace {

Problem assemble(int dim, std::vector<double> lower, std::vector<double> upper,
                 Density density, std::vector<double> points, std::vector<double> weights,
                 double p, std::string label) {
  Problem problem;
  problem.source.domain.lower = std::move(lower);
  problem.source.domain.upper = std::move(upper);
  problem.source.density = std::move(density);
  normalize_source(problem.source);
  problem.target.dim = dim;
  problem.target.points = std::move(points);
  problem.target.weights = std::move(weights);
  problem.cost.exponent = p;
  problem.label = std::move(label);
  problem.validate();
  return problem;
}

double e4_parameter(const std::vector<double>& params) {
  const double b = params.empty() ? 0.5 : params[0];
  if (!(b > 0.0 && b < 1.0))
    throw std::invalid_argument("E4: parameter b must lie in (0,1)");
  return b;
}

}  // namespace

Problem builtin_example(const std::string& id, const std::vector<double>& params) {
  if (id == "E0")
    return assemble(1, {0.0}, {1.0}, {}, {0.25, 0.75}, {0.2, 0.8}, 2.0, "E0");
  if (id == "E1")
    return assemble(1, {0.0}, {1.0}, {}, {0.25, 0.5, 0.75}, {0.3, 0.4, 0.3}, 2.0, "E1");
  if (id == "E2") {
    Density bump;
    bump.kind = DensityKind::GaussianBump;
    bump.rate = 10.0;
    bump.center = {0.5};
    return assemble(1, {0.0}, {1.0}, std::move(bump), {0.25, 0.5, 0.75}, {0.3, 0.4, 0.3},
                    2.0, "E2");
  }
  if (id == "E3")
    return assemble(1, {0.0}, {1.0}, {}, {-3.4584, -2.3668, 0.3374, 2.4005},
                    {0.0078, 0.4920, 0.4823, 0.0179}, 2.0, "E3");
  if (id == "E4") {
    const double b = e4_parameter(params);
    return assemble(2, {0.0, 0.0}, {1.0, 1.0}, {}, {0, 0, 0, 1, 1, 1},
                    {0.5 * (1 - b), b, 0.5 * (1 - b)}, 2.0, "E4");
  }
  if (id == "E5")
    return assemble(2, {0.0, 0.0}, {1.0, 1.0}, {}, {0, 0, 0, 1},
                    {0.726759, 0.273241}, 4.0, "E5");
  if (id == "E6")
    return assemble(2, {0.0, 0.0}, {1.0, 1.0}, {}, {0, 0, 0, 1},
                    {0.872066, 0.127934}, 4.0, "E6");
  if (id == "E7")
    return assemble(3, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {},
                    {0.5508, 0.8963, 0.0299,
                     0.7081, 0.1256, 0.4568,
                     0.2909, 0.2072, 0.6491,
                     0.5108, 0.0515, 0.2785,
                     0.8929, 0.4408, 0.6763},
                    {0.2, 0.2, 0.2, 0.2, 0.2}, 2.0, "E7");
  throw std::invalid_argument("unknown builtin example id: " + id);
}

std::optional<std::vector<double>> exact_solution(const std::string& id,
                                                  const std::vector<double>& params) {
  if (id == "E0") return std::vector<double>{-0.15, 0.15};
  if (id == "E4") {
    const double b = e4_parameter(params);
    const double s = (1.0 - 2.0 * std::sqrt(b)) / 3.0;
    return std::vector<double>{s, -2.0 * s, s};
  }
  if (id == "E5") return std::vector<double>{0.25, -0.25};
  if (id == "E6") return std::vector<double>{0.5, -0.5};
  return std::nullopt;
}

Problem random_problem(int dim, int n_points, std::uint64_t seed) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("random_problem: dim must be 1..3");
  if (n_points < 2) throw std::invalid_argument("random_problem: need at least 2 points");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> points(static_cast<size_t>(n_points) * dim);
  for (double& v : points) v = unit(rng);
  std::vector<double> weights(n_points);
  double sum = 0.0;
  for (double& w : weights) {
    w = 0.1 + 0.9 * unit(rng);
    sum += w;
  }
  for (double& w : weights) w /= sum;
  // Renormalize exactly; the division above can leave 1-ulp drift.
  double s2 = 0.0;
  for (int i = 0; i + 1 < n_points; ++i) s2 += weights[i];
  weights[n_points - 1] = 1.0 - s2;
  return assemble(dim, std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0), {},
                  std::move(points), std::move(weights), 2.0,
                  "rand-" + std::to_string(dim) + "d-" + std::to_string(n_points) + "-" +
                      std::to_string(seed));
}

double sup_cost_estimate(const Problem& problem) {
  const int dim = problem.dim();
  const int grid = 101;
  long long total = 1;
  for (int i = 0; i < dim; ++i) total *= grid;
  double sup = 0.0;
  std::vector<double> x(dim);
  for (long long idx = 0; idx < total; ++idx) {
    long long rest = idx;
    for (int a = 0; a < dim; ++a) {
      const int i = static_cast<int>(rest % grid);
      rest /= grid;
      x[a] = problem.source.domain.lower[a] +
             (problem.source.domain.upper[a] - problem.source.domain.lower[a]) * i /
                 (grid - 1);
    }
    for (int k = 0; k < problem.num_targets(); ++k)
      sup = std::max(sup, problem.cost(x.data(), problem.target.point(k), dim));
  }
  return sup;
}

}  // namespace otode
