#pragma once

#include <cstddef>

namespace stepcast::kernels {

// Data-parallel inner loops used by the model code, with a scalar
// reference implementation and an AVX2 variant selected at runtime.
// The scalar kernels define the semantics; the SIMD variants are
// equivalence-tested against them.
//
// Elementwise kernels (axpy, hadamard, relu, relu_grad_mask) produce
// bit-identical results on every backend: the AVX2 code uses separate
// mul/add so per-element rounding matches the scalar path. Reductions
// (dot, sum, sq_err_sum, abs_err_sum) accumulate in a different order
// under SIMD and may differ in the last ulps.

enum class Backend { scalar, avx2 };

struct KernelTable {
  double (*dot)(const double*, const double*, size_t);
  void (*axpy)(double, const double*, double*, size_t);          // y += a*x
  void (*hadamard)(const double*, const double*, double*, size_t);
  void (*relu)(const double*, double*, size_t);                  // out = max(0, x)
  void (*relu_grad_mask)(const double*, const double*, double*, size_t);  // out = up * (pre > 0)
  double (*sum)(const double*, size_t);
  double (*sq_err_sum)(const double*, const double*, size_t);    // sum (a-b)^2
  double (*abs_err_sum)(const double*, const double*, size_t);   // sum |a-b|
};

const KernelTable& scalar_table();
#if defined(STEPCAST_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

Backend active_backend();
const char* backend_name();
bool backend_supported(Backend b);

// Forces a backend; returns false (and leaves the selection unchanged)
// when unsupported on this CPU or build. The STEPCAST_KERNELS environment
// variable ("scalar" or "avx2") is honored at first use.
bool set_backend(Backend b);

namespace detail {
extern const KernelTable* g_active;  // nullptr until first use
const KernelTable* init_and_get();
}  // namespace detail

inline const KernelTable& table() {
  const KernelTable* t = detail::g_active;
  return *(t ? t : detail::init_and_get());
}

inline double dot(const double* a, const double* b, size_t n) { return table().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, size_t n) { table().axpy(alpha, x, y, n); }
inline void hadamard(const double* a, const double* b, double* out, size_t n) { table().hadamard(a, b, out, n); }
inline void relu(const double* x, double* out, size_t n) { table().relu(x, out, n); }
inline void relu_grad_mask(const double* pre, const double* up, double* out, size_t n) {
  table().relu_grad_mask(pre, up, out, n);
}
inline double sum(const double* x, size_t n) { return table().sum(x, n); }
inline double sq_err_sum(const double* a, const double* b, size_t n) { return table().sq_err_sum(a, b, n); }
inline double abs_err_sum(const double* a, const double* b, size_t n) { return table().abs_err_sum(a, b, n); }

}  // namespace stepcast::kernels
