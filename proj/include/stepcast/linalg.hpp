#pragma once

#include <cstddef>
#include <vector>

namespace stepcast {

// Row-major dense matrix of doubles. Feature matrices here stay small
// (d up to a few hundred), so a direct dense layout is enough.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(size_t i, size_t j) { return a[i * cols + j]; }
  double operator()(size_t i, size_t j) const { return a[i * cols + j]; }

  double* row(size_t i) { return a.data() + i * cols; }
  const double* row(size_t i) const { return a.data() + i * cols; }
};

// y = A x            (A: m x n, x: n, y: m)
void gemv(const Matrix& A, const double* x, double* y);

// y += A^T x         (A: m x n, x: m, y: n)
void gemv_t_add(const Matrix& A, const double* x, double* y);

// Solves A w = b for symmetric positive-definite A via an in-place
// Cholesky factorization. Throws std::runtime_error when a pivot is not
// positive (A singular or indefinite).
std::vector<double> cholesky_solve(Matrix A, std::vector<double> b);

}  // namespace stepcast
