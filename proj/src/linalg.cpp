#include "stepcast/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "stepcast/kernels.hpp"

namespace stepcast {

void gemv(const Matrix& A, const double* x, double* y) {
  for (size_t i = 0; i < A.rows; ++i) {
    y[i] = kernels::dot(A.row(i), x, A.cols);
  }
}

void gemv_t_add(const Matrix& A, const double* x, double* y) {
  for (size_t i = 0; i < A.rows; ++i) {
    kernels::axpy(x[i], A.row(i), y, A.cols);
  }
}

std::vector<double> cholesky_solve(Matrix A, std::vector<double> b) {
  const size_t n = A.rows;
  if (A.cols != n || b.size() != n) throw std::invalid_argument("cholesky_solve: shape mismatch");

  // A = L L^T, lower triangle computed in place.
  for (size_t j = 0; j < n; ++j) {
    double d = A(j, j) - kernels::dot(A.row(j), A.row(j), j);
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw std::runtime_error("cholesky_solve: matrix is not positive definite");
    }
    double ljj = std::sqrt(d);
    A(j, j) = ljj;
    for (size_t i = j + 1; i < n; ++i) {
      A(i, j) = (A(i, j) - kernels::dot(A.row(i), A.row(j), j)) / ljj;
    }
  }

  // Forward then backward substitution.
  for (size_t i = 0; i < n; ++i) {
    b[i] = (b[i] - kernels::dot(A.row(i), b.data(), i)) / A(i, i);
  }
  for (size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (size_t k = ii + 1; k < n; ++k) s -= A(k, ii) * b[k];
    b[ii] = s / A(ii, ii);
  }
  return b;
}

}  // namespace stepcast
