#pragma once

#include <vector>

#include "mgeom/matrix.hpp"

namespace mgeom {

struct SymEigen {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // column j pairs with eigenvalues[j]
};

/// (1/m) Z~ Z~^T for a p x m cloud, Z~ = Z minus its column mean when `center`.
Matrix covariance(const Matrix& points, bool center);

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// The input is symmetrized as (S + S^T) / 2 after checking that it is
/// symmetric to within 1e-8 (relative to 1 + max |S_ij|).
SymEigen sym_eigen(const Matrix& s);

/// sum_i log2(1 + lambda_i) over the eigenvalues of a PSD matrix.
///
/// Eigenvalues in (-1e-6, 0) are treated as round-off and clamped to zero;
/// anything more negative raises NotPsd.
double logdet_i_plus(const Matrix& s);

/// Same as logdet_i_plus with the natural logarithm.
double logdet_i_plus_ln(const Matrix& s);

/// Lower-triangular L with L L^T = a. Throws NotPsd if `a` is not positive
/// definite.
Matrix cholesky(const Matrix& a);

/// Solves a x = b for symmetric positive definite `a`.
std::vector<double> solve_spd(const Matrix& a, const std::vector<double>& b);

/// log2 det(b^{-1} a) for symmetric positive definite a and b, computed from
/// the eigenvalues of L^{-1} a L^{-T} where b = L L^T.
double log2_det_ratio(const Matrix& a, const Matrix& b);

}  // namespace mgeom
