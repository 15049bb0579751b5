#include "mvre/linalg.hpp"

#include <cmath>

namespace mvre {

namespace {

template <typename M>
bool cholesky_impl(const M& a, M& out) {
  const Eigen::Index p = a.rows();
  if (p != a.cols() || p == 0) return false;
  double max_diag = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double threshold = kPivotTolerance * max_diag;
  out.setZero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= out(j, k) * out(j, k);
    if (!(pivot > threshold)) return false;
    const double ljj = std::sqrt(pivot);
    out(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < p; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= out(i, k) * out(j, k);
      out(i, j) = s / ljj;
    }
  }
  return true;
}

}  // namespace

bool try_cholesky(const Matrix& a, Matrix& out) { return cholesky_impl(a, out); }

bool try_cholesky(const DenseMatrix& a, DenseMatrix& out) { return cholesky_impl(a, out); }

Matrix cholesky(const Matrix& a) {
  Matrix l;
  if (!try_cholesky(a, l)) {
    throw Error(ErrorCode::NonPositiveDefinite, "Cholesky factorization failed: matrix is not positive definite");
  }
  return l;
}

double log_det_from_chol(const Matrix& chol) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < chol.rows(); ++i) s += std::log(chol(i, i));
  return 2.0 * s;
}

Matrix inverse_from_chol(const Matrix& chol) {
  const Eigen::Index p = chol.rows();
  Matrix linv = chol.triangularView<Eigen::Lower>().solve(Matrix::Identity(p, p));
  Matrix inv = linv.transpose() * linv;
  // exact symmetry
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = v;
      inv(j, i) = v;
    }
  }
  return inv;
}

Matrix spd_inverse(const Matrix& a) { return inverse_from_chol(cholesky(a)); }

Vector spd_solve(const Matrix& a, const Vector& b) {
  const Matrix l = cholesky(a);
  Vector y = l.triangularView<Eigen::Lower>().solve(b);
  return l.transpose().triangularView<Eigen::Upper>().solve(y);
}

double log_det_spd(const Matrix& a) { return log_det_from_chol(cholesky(a)); }

DenseVector vec(const DenseMatrix& a) {
  DenseVector v(a.size());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) v(k++) = a(i, j);
  }
  return v;
}

DenseVector vech(const DenseMatrix& a) {
  const Eigen::Index p = a.rows();
  DenseVector v(p * (p + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = j; i < p; ++i) v(k++) = a(i, j);
  }
  return v;
}

DenseMatrix unvech(const DenseVector& v, int p) {
  if (v.size() != static_cast<Eigen::Index>(p) * (p + 1) / 2) {
    throw Error(ErrorCode::DimensionMismatch, "vech length does not match dimension");
  }
  DenseMatrix a(p, p);
  Eigen::Index k = 0;
  for (int j = 0; j < p; ++j) {
    for (int i = j; i < p; ++i) {
      a(i, j) = v(k);
      a(j, i) = v(k);
      ++k;
    }
  }
  return a;
}

DenseMatrix kronecker(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

DenseMatrix duplication_matrix(int p) {
  if (p < 1) throw Error(ErrorCode::InvalidParameter, "duplication matrix needs p >= 1");
  const int q = p * (p + 1) / 2;
  DenseMatrix g = DenseMatrix::Zero(p * p, q);
  // column k of G corresponds to vech position of (i, j), i >= j
  int k = 0;
  for (int j = 0; j < p; ++j) {
    for (int i = j; i < p; ++i) {
      g(j * p + i, k) = 1.0;
      g(i * p + j, k) = 1.0;
      ++k;
    }
  }
  return g;
}

}  // namespace mvre
