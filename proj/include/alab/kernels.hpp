#pragma once
// Dense vector kernels used by the eigenbasis transforms. A scalar reference
// implementation is always present; vectorized variants are chosen once at
// startup from CPU features and can be forced with ALAB_SIMD=scalar|avx2|neon.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace alab::kernels {

enum class Isa { scalar, avx2, neon };

struct Table {
  Isa isa;
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i a_i b_i c_i
  double (*dot3)(const double* a, const double* b, const double* c, std::size_t n);
  // y += alpha x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out_j = sum_i A[j*lda + i] x_i for j < ncols (columns are contiguous)
  void (*gemv_t)(const double* a, std::size_t lda, std::size_t ncols, std::size_t n,
                 const double* x, double* out);
  // y = sum_j c_j A[j*lda + .]  (y is overwritten)
  void (*gemv_n)(const double* a, std::size_t lda, std::size_t ncols, std::size_t n,
                 const double* c, double* y);
  // coef_i = decay_i coef_i + gain_i forcing_i  (exponential-Euler modal update)
  void (*exp_euler)(const double* decay, const double* gain, const double* forcing,
                    double* coef, std::size_t n);
};

const Table& scalar_table();
// Returns nullptr when the variant was not compiled in or the CPU lacks it.
const Table* table_for(Isa isa);
const Table& active();
std::vector<Isa> available();
std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double dot3(std::span<const double> a, std::span<const double> b,
                   std::span<const double> c) {
  return active().dot3(a.data(), b.data(), c.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace alab::kernels
