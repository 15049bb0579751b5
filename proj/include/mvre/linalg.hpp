#pragma once

// Dense kernels for the small symmetric matrices of the model.

#include "mvre/core.hpp"

namespace mvre {

/// Relative pivot threshold: a pivot below kPivotTolerance * max|diag| fails.
inline constexpr double kPivotTolerance = 1e-12;

/// Lower Cholesky factor written into `out`; returns false instead of throwing.
/// Only the lower triangle of `a` is read.
bool try_cholesky(const Matrix& a, Matrix& out);

/// Lower Cholesky factor. Throws Error(NonPositiveDefinite).
Matrix cholesky(const Matrix& a);

/// 2 * sum(log(diag(L))) for a lower factor L.
double log_det_from_chol(const Matrix& chol);

Matrix spd_inverse(const Matrix& a);
Vector spd_solve(const Matrix& a, const Vector& b);
double log_det_spd(const Matrix& a);

/// Inverse of L * L^T given its lower factor L.
Matrix inverse_from_chol(const Matrix& chol);

DenseVector vec(const DenseMatrix& a);
DenseVector vech(const DenseMatrix& a);
/// Inverse of vech: symmetric p x p matrix from its half-vectorization.
DenseMatrix unvech(const DenseVector& v, int p);
DenseMatrix kronecker(const DenseMatrix& a, const DenseMatrix& b);

/// G_p with G_p * vech(A) == vec(A) for every symmetric A.
DenseMatrix duplication_matrix(int p);

/// Cholesky of a heap matrix (used for the p(p+1)/2-sized prior matrix).
bool try_cholesky(const DenseMatrix& a, DenseMatrix& out);

}  // namespace mvre
