#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace alab::kernels::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t s0 = vdupq_n_f64(0.0), s1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = vfmaq_f64(s0, vld1q_f64(a + i), vld1q_f64(b + i));
    s1 = vfmaq_f64(s1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  float64x2_t s0 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    s0 = vfmaq_f64(s0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)), vld1q_f64(c + i));
  double s = vaddvq_f64(s0);
  for (; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
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
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vmulq_f64(vld1q_f64(decay + i), vld1q_f64(coef + i));
    vst1q_f64(coef + i, vfmaq_f64(v, vld1q_f64(gain + i), vld1q_f64(forcing + i)));
  }
  for (; i < n; ++i) coef[i] = decay[i] * coef[i] + gain[i] * forcing[i];
}

}  // namespace

const Table kNeon{Isa::neon, "neon", dot, dot3, axpy, gemv_t, gemv_n, exp_euler};

}  // namespace alab::kernels::detail
