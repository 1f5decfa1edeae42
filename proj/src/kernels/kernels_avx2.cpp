#include <immintrin.h>

#include "kernels_impl.hpp"

namespace alab::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4) s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    s0 = _mm256_fmadd_pd(ab, _mm256_loadu_pd(c + i), s0);
  }
  double s = hsum(s0);
  for (; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four columns per pass so x is streamed once per block.
void gemv_t(const double* a, std::size_t lda, std::size_t ncols, std::size_t n, const double* x,
            double* out) {
  std::size_t j = 0;
  for (; j + 4 <= ncols; j += 4) {
    const double* c0 = a + j * lda;
    const double* c1 = c0 + lda;
    const double* c2 = c1 + lda;
    const double* c3 = c2 + lda;
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      const __m256d vx = _mm256_loadu_pd(x + i);
      s0 = _mm256_fmadd_pd(_mm256_loadu_pd(c0 + i), vx, s0);
      s1 = _mm256_fmadd_pd(_mm256_loadu_pd(c1 + i), vx, s1);
      s2 = _mm256_fmadd_pd(_mm256_loadu_pd(c2 + i), vx, s2);
      s3 = _mm256_fmadd_pd(_mm256_loadu_pd(c3 + i), vx, s3);
    }
    double r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2), r3 = hsum(s3);
    for (; i < n; ++i) {
      r0 += c0[i] * x[i];
      r1 += c1[i] * x[i];
      r2 += c2[i] * x[i];
      r3 += c3[i] * x[i];
    }
    out[j] = r0;
    out[j + 1] = r1;
    out[j + 2] = r2;
    out[j + 3] = r3;
  }
  for (; j < ncols; ++j) out[j] = dot(a + j * lda, x, n);
}

void gemv_n(const double* a, std::size_t lda, std::size_t ncols, std::size_t n, const double* c,
            double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= ncols; j += 4) {
    const double* c0 = a + j * lda;
    const double* c1 = c0 + lda;
    const double* c2 = c1 + lda;
    const double* c3 = c2 + lda;
    const __m256d a0 = _mm256_set1_pd(c[j]), a1 = _mm256_set1_pd(c[j + 1]);
    const __m256d a2 = _mm256_set1_pd(c[j + 2]), a3 = _mm256_set1_pd(c[j + 3]);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      __m256d acc = _mm256_loadu_pd(y + i);
      acc = _mm256_fmadd_pd(a0, _mm256_loadu_pd(c0 + i), acc);
      acc = _mm256_fmadd_pd(a1, _mm256_loadu_pd(c1 + i), acc);
      acc = _mm256_fmadd_pd(a2, _mm256_loadu_pd(c2 + i), acc);
      acc = _mm256_fmadd_pd(a3, _mm256_loadu_pd(c3 + i), acc);
      _mm256_storeu_pd(y + i, acc);
    }
    for (; i < n; ++i) y[i] += c[j] * c0[i] + c[j + 1] * c1[i] + c[j + 2] * c2[i] + c[j + 3] * c3[i];
  }
  for (; j < ncols; ++j) axpy(c[j], a + j * lda, y, n);
}

void exp_euler(const double* decay, const double* gain, const double* forcing, double* coef,
               std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_mul_pd(_mm256_loadu_pd(decay + i), _mm256_loadu_pd(coef + i));
    v = _mm256_fmadd_pd(_mm256_loadu_pd(gain + i), _mm256_loadu_pd(forcing + i), v);
    _mm256_storeu_pd(coef + i, v);
  }
  for (; i < n; ++i) coef[i] = decay[i] * coef[i] + gain[i] * forcing[i];
}

}  // namespace

const Table kAvx2{Isa::avx2, "avx2", dot, dot3, axpy, gemv_t, gemv_n, exp_euler};

}  // namespace alab::kernels::detail
