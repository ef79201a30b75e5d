#pragma once

#include <vector>

#include "otode/entropic.hpp"

namespace otode {

// Solves H x = P b on the orthogonal complement of the ones vector, where
// P = I - (1/n) 1 1^T. Requires H symmetric with H 1 ~ 0. Implemented by the
// rank-one deflation (H + (1/n) 1 1^T) x = P b, Cholesky first, spectral
// fallback when a pivot goes nonpositive. Throws SingularSystemError when the
// deflated matrix is singular at the 1e-14 * |H| level.
std::vector<double> projected_solve(const SymmetricMatrix& H, const std::vector<double>& b);

// Eigenvalues of H restricted to the zero-mean subspace, ascending. The known
// null direction is deflated through an explicit orthonormal basis of the
// complement before the dense symmetric eigensolve.
std::vector<double> restricted_eigenvalues(const SymmetricMatrix& H);

// Cyclic Jacobi eigensolver. Eigenvalues ascending; eigenvectors (when
// requested) are the columns of `vectors`, matching the value order.
struct EigenDecomposition {
  std::vector<double> values;
  std::vector<double> vectors;  // n x n row-major, column k is eigenvector k
};
EigenDecomposition jacobi_eigenvalues(const SymmetricMatrix& A, bool with_vectors);

}  // namespace otode
