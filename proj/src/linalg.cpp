#include "pnn/linalg.hpp"

#include <lapacke.h>

#include <cmath>
#include <string>

namespace pnn {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree (" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + ")");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) {
        c(i, j) += aik * b(k, j);
      }
    }
  }
  return c;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) {
    throw ShapeError("matvec: matrix has " + std::to_string(a.cols()) +
                     " columns, vector has " + std::to_string(x.size()) + " entries");
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

Matrix cholesky(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) {
    throw ShapeError("cholesky: matrix is not square");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double scale = std::max({std::fabs(a(i, j)), std::fabs(a(j, i)), 1.0});
      if (std::fabs(a(i, j) - a(j, i)) > 1e-12 * scale) {
        throw DomainError("cholesky: matrix is not symmetric at (" + std::to_string(i) +
                          "," + std::to_string(j) + ")");
      }
    }
  }
  Matrix l = a;
  const lapack_int info = LAPACKE_dpotrf(LAPACK_ROW_MAJOR, 'L',
                                         static_cast<lapack_int>(n), l.data().data(),
                                         static_cast<lapack_int>(n));
  if (info > 0) {
    throw FactorizationError("cholesky: non-positive pivot at index " +
                             std::to_string(info - 1));
  }
  if (info < 0) {
    throw FactorizationError("cholesky: invalid argument " + std::to_string(-info));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) l(i, j) = 0.0;
  }
  return l;
}

Vector solve_cholesky(const Matrix& factor, const Vector& rhs) {
  const std::size_t n = factor.rows();
  if (factor.cols() != n || rhs.size() != n) {
    throw ShapeError("solve_cholesky: factor/rhs dimensions disagree");
  }
  // L z = rhs
  Vector z(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = rhs[i];
    for (std::size_t k = 0; k < i; ++k) acc -= factor(i, k) * z[k];
    z[i] = acc / factor(i, i);
  }
  // L^T x = z
  Vector x(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = z[ii];
    for (std::size_t k = ii + 1; k < n; ++k) acc -= factor(k, ii) * x[k];
    x[ii] = acc / factor(ii, ii);
  }
  return x;
}

}  // namespace pnn
