#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace otode {

// Axis-aligned box in R^d, d in {1,2,3}.
struct BoxDomain {
  std::vector<double> lower;
  std::vector<double> upper;

  int dim() const { return static_cast<int>(lower.size()); }
  double volume() const;
  void validate() const;  // throws std::invalid_argument
};

enum class DensityKind { Uniform, GaussianBump };

// Unnormalized density shape. GaussianBump is exp(-rate * |x - center|^2).
struct Density {
  DensityKind kind = DensityKind::Uniform;
  double rate = 0.0;
  std::vector<double> center;

  double shape(const double* x, int dim) const;
};

struct SourceMeasure {
  BoxDomain domain;
  Density density;
  // Multiplicative constant making the total mass 1; recomputed at
  // construction/load time rather than trusted from input.
  double normalization = 1.0;

  double operator()(const double* x) const {
    return normalization * density.shape(x, domain.dim());
  }
};

struct TargetMeasure {
  int dim = 1;
  std::vector<double> points;   // N x dim, row-major
  std::vector<double> weights;  // N, positive, sums to 1

  int size() const { return static_cast<int>(weights.size()); }
  const double* point(int k) const { return points.data() + static_cast<size_t>(k) * dim; }
  double min_weight() const;
  void validate() const;
};

enum class CostKind { EuclideanPower };

// cost(x, y) = |x - y|_2^p with p >= 2.
struct CostFunction {
  CostKind kind = CostKind::EuclideanPower;
  double exponent = 2.0;

  double operator()(const double* x, const double* y, int dim) const;
  // d/dx |x - y|^p in one dimension.
  double grad_1d(double x, double y) const;
};

struct Problem {
  SourceMeasure source;
  TargetMeasure target;
  CostFunction cost;
  std::string label;

  int dim() const { return source.domain.dim(); }
  int num_targets() const { return target.size(); }
  void validate() const;
};

// Recomputes source.normalization so that the density integrates to 1.
void normalize_source(SourceMeasure& source);

double cost_eval(const CostFunction& cost, const std::vector<double>& x,
                 const std::vector<double>& y);

// Named instances E0..E7. E4 takes an optional parameter b in (0,1),
// defaulting to 0.5.
Problem builtin_example(const std::string& id, const std::vector<double>& params = {});

// Closed-form dual solutions where known (E0, E4, E5, E6), zero-mean.
// Returns nullopt for instances whose reference is computed numerically.
std::optional<std::vector<double>> exact_solution(const std::string& id,
                                                  const std::vector<double>& params = {});

// Seeded generator for random instances: uniform density on the unit box,
// uniform random targets inside it, positive weights normalized to 1.
Problem random_problem(int dim, int n_points, std::uint64_t seed);

// sup |c| over X x Y, sampled on a 101-per-axis grid of X.
double sup_cost_estimate(const Problem& problem);

}  // namespace otode
