#include "kernels_impl.hpp"

namespace alab::kernels::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_t(const double* a, std::size_t lda, std::size_t ncols, std::size_t n, const double* x,
            double* out) {
  for (std::size_t j = 0; j < ncols; ++j) out[j] = dot(a + j * lda, x, n);
}

void gemv_n(const double* a, std::size_t lda, std::size_t ncols, std::size_t n, const double* c,
            double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
  for (std::size_t j = 0; j < ncols; ++j) axpy(c[j], a + j * lda, y, n);
}

void exp_euler(const double* decay, const double* gain, const double* forcing, double* coef,
               std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) coef[i] = decay[i] * coef[i] + gain[i] * forcing[i];
}

}  // namespace

const Table kScalar{Isa::scalar, "scalar", dot, dot3, axpy, gemv_t, gemv_n, exp_euler};

}  // namespace alab::kernels::detail
