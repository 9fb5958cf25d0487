#include "stepcast/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace stepcast::kernels {

// ---------------------------------------------------------------------
// scalar reference kernels
// ---------------------------------------------------------------------

namespace {

double dot_scalar(const double* a, const double* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void hadamard_scalar(const double* a, const double* b, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void relu_scalar(const double* x, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_mask_scalar(const double* pre, const double* up, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = pre[i] > 0.0 ? up[i] : 0.0;
}

double sum_scalar(const double* x, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sq_err_sum_scalar(const double* a, const double* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double abs_err_sum_scalar(const double* a, const double* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
  return acc;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t = {
      dot_scalar,  axpy_scalar, hadamard_scalar,  relu_scalar,
      relu_grad_mask_scalar, sum_scalar, sq_err_sum_scalar, abs_err_sum_scalar,
  };
  return t;
}

// ---------------------------------------------------------------------
// runtime dispatch
// ---------------------------------------------------------------------

namespace detail {
const KernelTable* g_active = nullptr;
}

namespace {
Backend g_backend = Backend::scalar;
}

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(STEPCAST_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

bool set_backend(Backend b) {
  if (!backend_supported(b)) return false;
  g_backend = b;
#if defined(STEPCAST_HAVE_AVX2)
  detail::g_active = b == Backend::avx2 ? &avx2_table() : &scalar_table();
#else
  detail::g_active = &scalar_table();
#endif
  return true;
}

namespace detail {

const KernelTable* init_and_get() {
  Backend pick = backend_supported(Backend::avx2) ? Backend::avx2 : Backend::scalar;
  if (const char* env = std::getenv("STEPCAST_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) pick = Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && backend_supported(Backend::avx2)) pick = Backend::avx2;
  }
  set_backend(pick);
  return g_active;
}

}  // namespace detail

Backend active_backend() {
  table();  // force init
  return g_backend;
}

const char* backend_name() {
  return active_backend() == Backend::avx2 ? "avx2" : "scalar";
}

}  // namespace stepcast::kernels
