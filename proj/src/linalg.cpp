#include "otode/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "otode/errors.hpp"

namespace otode {

namespace {

// Returns false when a pivot drops below the cutoff; L is lower triangular.
bool cholesky(const SymmetricMatrix& M, double cutoff, std::vector<double>& L) {
  const int n = M.n;
  L.assign(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = M.at(i, j);
      for (int k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
      if (i == j) {
        if (s <= cutoff) return false;
        L[i * n + i] = std::sqrt(s);
      } else {
        L[i * n + j] = s / L[j * n + j];
      }
    }
  }
  return true;
}

std::vector<double> cholesky_solve(const std::vector<double>& L, int n,
                                   const std::vector<double>& b) {
  std::vector<double> y(n), x(n);
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= L[i * n + k] * y[k];
    y[i] = s / L[i * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= L[k * n + i] * x[k];
    x[i] = s / L[i * n + i];
  }
  return x;
}

void project_zero_mean(std::vector<double>& v) {
  const double mean =
      std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

}  // namespace

EigenDecomposition jacobi_eigenvalues(const SymmetricMatrix& A, bool with_vectors) {
  const int n = A.n;
  std::vector<double> a = A.entries;
  std::vector<double> v;
  if (with_vectors) {
    v.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;
  }
  double norm = 0.0;
  for (double x : a) norm += x * x;
  norm = std::sqrt(norm);
  const double threshold = 1e-13 * std::max(norm, 1e-300);

  auto off_norm = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += 2.0 * a[i * n + j] * a[i * n + j];
    return std::sqrt(s);
  };

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps && off_norm() > threshold; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) == 0.0) continue;
        const double app = a[p * n + p], aqq = a[q * n + q];
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        if (with_vectors) {
          for (int k = 0; k < n; ++k) {
            const double vkp = v[k * n + p], vkq = v[k * n + q];
            v[k * n + p] = c * vkp - s * vkq;
            v[k * n + q] = s * vkp + c * vkq;
          }
        }
      }
    }
  }

  EigenDecomposition eig;
  eig.values.resize(n);
  for (int i = 0; i < n; ++i) eig.values[i] = a[i * n + i];
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return eig.values[i] < eig.values[j]; });
  std::vector<double> sorted(n);
  for (int i = 0; i < n; ++i) sorted[i] = eig.values[order[i]];
  eig.values = std::move(sorted);
  if (with_vectors) {
    eig.vectors.assign(static_cast<size_t>(n) * n, 0.0);
    for (int col = 0; col < n; ++col)
      for (int row = 0; row < n; ++row)
        eig.vectors[row * n + col] = v[row * n + order[col]];
  }
  return eig;
}

std::vector<double> projected_solve(const SymmetricMatrix& H, const std::vector<double>& b) {
  const int n = H.n;
  if (n < 2) throw std::invalid_argument("projected_solve: need n >= 2");
  if (static_cast<int>(b.size()) != n)
    throw std::invalid_argument("projected_solve: size mismatch");
  H.check_symmetric();

  SymmetricMatrix M = H;
  const double shift = 1.0 / n;
  for (double& e : M.entries) e += shift;
  std::vector<double> rhs = b;
  project_zero_mean(rhs);

  // Keyed on the deflated matrix as well, so an all-zero H (scale set by the
  // rank-one shift alone) still registers as singular on the complement.
  const double cutoff = 1e-14 * std::max(H.max_abs(), M.max_abs());
  std::vector<double> L;
  std::vector<double> x;
  if (cholesky(M, cutoff, L)) {
    x = cholesky_solve(L, n, rhs);
  } else {
    // Quadrature noise can push an eigenvalue slightly negative near t=1;
    // fall back to a spectral solve and only fail when the deflated matrix
    // is singular at the cutoff level.
    EigenDecomposition eig = jacobi_eigenvalues(M, true);
    double lambda_min_abs = std::abs(eig.values[0]);
    for (double lambda : eig.values) lambda_min_abs = std::min(lambda_min_abs, std::abs(lambda));
    if (lambda_min_abs < cutoff)
      throw SingularSystemError(
          "projected_solve: matrix singular on the zero-mean complement", eig.values[0]);
    x.assign(n, 0.0);
    for (int k = 0; k < n; ++k) {
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += eig.vectors[i * n + k] * rhs[i];
      const double coef = dot / eig.values[k];
      for (int i = 0; i < n; ++i) x[i] += coef * eig.vectors[i * n + k];
    }
  }
  project_zero_mean(x);
  return x;
}

std::vector<double> restricted_eigenvalues(const SymmetricMatrix& H) {
  const int n = H.n;
  if (n < 2) throw std::invalid_argument("restricted_eigenvalues: need n >= 2");
  H.check_symmetric();

  // Householder reflector mapping 1/sqrt(n) to -e1; its remaining columns are
  // an orthonormal basis of the zero-mean complement.
  std::vector<double> w(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> u = w;
  u[0] += 1.0;  // w - (-e1)
  double unorm2 = 0.0;
  for (double x : u) unorm2 += x * x;
  auto basis = [&](int col, int row) {
    // column (col+1) of I - 2 u u^T / |u|^2, col in [0, n-2]
    const double e = (row == col + 1) ? 1.0 : 0.0;
    return e - 2.0 * u[row] * u[col + 1] / unorm2;
  };

  const int m = n - 1;
  SymmetricMatrix B(m);
  // B = Q^T H Q with Q the n x m basis above.
  std::vector<double> HQ(static_cast<size_t>(n) * m, 0.0);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < m; ++c) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += H.at(i, j) * basis(c, j);
      HQ[i * m + c] = s;
    }
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += basis(r, i) * HQ[i * m + c];
      B.at(r, c) = s;
    }
  // Symmetrize away the O(eps) asymmetry introduced by the two products.
  for (int r = 0; r < m; ++r)
    for (int c = r + 1; c < m; ++c) {
      const double v = 0.5 * (B.at(r, c) + B.at(c, r));
      B.at(r, c) = v;
      B.at(c, r) = v;
    }
  return jacobi_eigenvalues(B, false).values;
}

}  // namespace otode
