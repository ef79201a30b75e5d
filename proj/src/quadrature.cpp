#include "otode/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "otode/errors.hpp"

namespace otode {

namespace {

// Gauss 7 / Kronrod 15 pair on [-1,1] (nonnegative abscissae; every second
// Kronrod node is a Gauss node).
constexpr double kK15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kK15Weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Gauss 10 / Kronrod 21 pair.
constexpr double kK21Nodes[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr double kK21Weights[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr double kG10Weights[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Rule {
  int n = 15;                  // points per axis
  std::array<double, 21> node;  // expanded, ascending
  std::array<double, 21> wk;    // Kronrod weights
  std::array<double, 21> wg;    // embedded Gauss weights (0 off Gauss nodes)
};

Rule build_rule(int order) {
  Rule r;
  const double* nodes;
  const double* wk;
  const double* wg;
  int half;
  if (order <= 15) {
    r.n = 15;
    nodes = kK15Nodes;
    wk = kK15Weights;
    wg = kG7Weights;
    half = 8;
  } else {
    r.n = 21;
    nodes = kK21Nodes;
    wk = kK21Weights;
    wg = kG10Weights;
    half = 11;
  }
  for (int i = 0; i < half; ++i) {
    const int lo = i, hi = r.n - 1 - i;
    r.node[lo] = -nodes[i];
    r.node[hi] = nodes[i];
    r.wk[lo] = r.wk[hi] = wk[i];
    r.wg[lo] = r.wg[hi] = 0.0;
    // Gauss nodes sit at odd positions of the Kronrod ladder.
    if (i % 2 == 1) r.wg[lo] = r.wg[hi] = wg[i / 2];
  }
  if (r.n == 15) r.wg[7] = kG7Weights[3];  // center point is a Gauss node for K15
  return r;
}

struct Panel {
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  std::vector<double> value;  // Kronrod estimate, scaled
  double error = 0.0;         // max over components of |K - G|
  bool alive = true;
};

void evaluate_panel(const VectorIntegrand& f, int n_components, int dim, const Rule& rule,
                    Panel& panel, std::vector<double>& point_buf,
                    std::vector<double>& kronrod, std::vector<double>& gauss,
                    long long& evaluations) {
  kronrod.assign(n_components, 0.0);
  gauss.assign(n_components, 0.0);
  double scale = 1.0;
  std::array<double, 3> center{}, half{};
  for (int a = 0; a < dim; ++a) {
    center[a] = 0.5 * (panel.lo[a] + panel.hi[a]);
    half[a] = 0.5 * (panel.hi[a] - panel.lo[a]);
    scale *= half[a];
  }
  long long total = 1;
  for (int a = 0; a < dim; ++a) total *= rule.n;
  std::array<double, 3> x{};
  for (long long idx = 0; idx < total; ++idx) {
    long long rest = idx;
    double wK = 1.0, wG = 1.0;
    for (int a = 0; a < dim; ++a) {
      const int i = static_cast<int>(rest % rule.n);
      rest /= rule.n;
      x[a] = center[a] + half[a] * rule.node[i];
      wK *= rule.wk[i];
      wG *= rule.wg[i];
    }
    f(x.data(), point_buf.data());
    ++evaluations;
    for (int j = 0; j < n_components; ++j) {
      const double v = point_buf[j];
      if (!std::isfinite(v)) throw QuadratureError("integrand returned a non-finite value");
      kronrod[j] += wK * v;
      if (wG != 0.0) gauss[j] += wG * v;
    }
  }
  panel.value.resize(n_components);
  panel.error = 0.0;
  for (int j = 0; j < n_components; ++j) {
    panel.value[j] = scale * kronrod[j];
    panel.error = std::max(panel.error, std::abs(scale * (kronrod[j] - gauss[j])));
  }
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: rel_tol must be > 0");
  if (abs_tol < 0.0) throw std::invalid_argument("QuadratureSpec: abs_tol must be >= 0");
  if (max_subdivisions < 1)
    throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
  if (base_rule_order < 2)
    throw std::invalid_argument("QuadratureSpec: base_rule_order must be >= 2");
}

QuadratureSpec QuadratureSpec::for_dim(int dim) {
  QuadratureSpec spec;
  switch (dim) {
    case 1:
      spec.rel_tol = 1e-10;
      spec.abs_tol = 1e-14;
      spec.max_subdivisions = 1 << 14;
      break;
    case 2:
      spec.rel_tol = 1e-8;
      spec.abs_tol = 1e-12;
      spec.max_subdivisions = 1 << 12;
      break;
    default:
      spec.rel_tol = 1e-6;
      spec.abs_tol = 1e-10;
      spec.max_subdivisions = 1 << 12;
      break;
  }
  return spec;
}

namespace {

// Sorted interior edge coordinates for one axis, deduplicated.
std::vector<double> axis_edges(double lo, double hi, const std::vector<double>* hints) {
  std::vector<double> edges;
  if (hints) {
    for (double h : *hints)
      if (h > lo + 1e-13 && h < hi - 1e-13) edges.push_back(h);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](double a, double b) { return b - a < 1e-13; }),
                edges.end());
  }
  return edges;
}

}  // namespace

IntegralResult integrate(const VectorIntegrand& f, int n_components,
                         const BoxDomain& domain, const QuadratureSpec& spec,
                         const SplitHints* hints) {
  spec.validate();
  domain.validate();
  if (n_components < 1) throw std::invalid_argument("integrate: n_components must be >= 1");
  const int dim = domain.dim();
  const Rule rule = build_rule(spec.base_rule_order);

  // Pre-split each axis at the hint coordinates, then take the product grid.
  std::array<std::vector<double>, 3> cuts;
  long long initial_count = 1;
  for (int a = 0; a < dim; ++a) {
    const std::vector<double>* axis_hints =
        hints && a < static_cast<int>(hints->per_axis.size()) ? &hints->per_axis[a]
                                                              : nullptr;
    std::vector<double> edges = axis_edges(domain.lower[a], domain.upper[a], axis_hints);
    cuts[a].push_back(domain.lower[a]);
    cuts[a].insert(cuts[a].end(), edges.begin(), edges.end());
    cuts[a].push_back(domain.upper[a]);
    initial_count *= static_cast<long long>(cuts[a].size()) - 1;
  }
  if (initial_count > 4096) {
    // A hint grid this dense would eat the whole budget; fall back to the
    // plain root panel.
    initial_count = 1;
    for (int a = 0; a < dim; ++a) cuts[a] = {domain.lower[a], domain.upper[a]};
  }

  std::vector<Panel> panels;
  panels.reserve(static_cast<size_t>(initial_count) + 64);
  std::vector<double> point_buf(n_components), kbuf, gbuf;
  long long evaluations = 0;

  for (long long idx = 0; idx < initial_count; ++idx) {
    long long rest = idx;
    Panel panel;
    for (int a = 0; a < dim; ++a) {
      const long long cells = static_cast<long long>(cuts[a].size()) - 1;
      const int i = static_cast<int>(rest % cells);
      rest /= cells;
      panel.lo[a] = cuts[a][i];
      panel.hi[a] = cuts[a][i + 1];
    }
    evaluate_panel(f, n_components, dim, rule, panel, point_buf, kbuf, gbuf, evaluations);
    panels.push_back(std::move(panel));
  }

  // (error, index) max-heap; index ties keep the ordering deterministic.
  using Entry = std::pair<double, size_t>;
  std::priority_queue<Entry> heap;
  std::vector<double> total(n_components, 0.0);
  double total_err = 0.0;
  for (size_t i = 0; i < panels.size(); ++i) {
    heap.emplace(panels[i].error, i);
    for (int j = 0; j < n_components; ++j) total[j] += panels[i].value[j];
    total_err += panels[i].error;
  }

  auto tolerance = [&]() {
    double vmax = 0.0;
    for (double v : total) vmax = std::max(vmax, std::abs(v));
    return std::max(spec.abs_tol, spec.rel_tol * vmax);
  };

  int splits = 0;
  while (total_err > tolerance() && splits < spec.max_subdivisions && !heap.empty()) {
    const auto [err, index] = heap.top();
    heap.pop();
    if (!panels[index].alive || err != panels[index].error) continue;
    Panel parent = panels[index];

    int axis = 0;
    double widest = parent.hi[0] - parent.lo[0];
    for (int a = 1; a < dim; ++a) {
      const double w = parent.hi[a] - parent.lo[a];
      if (w > widest) {
        widest = w;
        axis = a;
      }
    }
    const double mid = 0.5 * (parent.lo[axis] + parent.hi[axis]);
    if (!(mid > parent.lo[axis] && mid < parent.hi[axis])) continue;  // width exhausted

    panels[index].alive = false;
    for (int j = 0; j < n_components; ++j) total[j] -= parent.value[j];
    total_err -= parent.error;

    for (int side = 0; side < 2; ++side) {
      Panel child;
      child.lo = parent.lo;
      child.hi = parent.hi;
      (side == 0 ? child.hi : child.lo)[axis] = mid;
      evaluate_panel(f, n_components, dim, rule, child, point_buf, kbuf, gbuf, evaluations);
      for (int j = 0; j < n_components; ++j) total[j] += child.value[j];
      total_err += child.error;
      panels.push_back(std::move(child));
      heap.emplace(panels.back().error, panels.size() - 1);
    }
    ++splits;
  }

  // Re-sum surviving panels in insertion order; the incremental totals carry
  // cancellation noise after many splits.
  IntegralResult result;
  result.value.assign(n_components, 0.0);
  result.error_estimate = 0.0;
  for (const Panel& panel : panels) {
    if (!panel.alive) continue;
    for (int j = 0; j < n_components; ++j) result.value[j] += panel.value[j];
    result.error_estimate += panel.error;
  }
  double vmax = 0.0;
  for (double v : result.value) vmax = std::max(vmax, std::abs(v));
  result.converged =
      result.error_estimate <= std::max(spec.abs_tol, spec.rel_tol * vmax);
  result.evaluations = evaluations;
  return result;
}

IntegralResult integrate_scalar(const std::function<double(const double*)>& f,
                                const BoxDomain& domain, const QuadratureSpec& spec,
                                const SplitHints* hints) {
  return integrate([&](const double* x, double* out) { out[0] = f(x); }, 1, domain, spec,
                   hints);
}

}  // namespace otode
