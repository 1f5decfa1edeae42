#include <doctest.h>

#include <cmath>
#include <random>

#include "alab/kernels.hpp"
#include "support.hpp"

using namespace alab;
using namespace testing;

TEST_SUITE("kernels") {

TEST_CASE("scalar table is always available and active table is listed") {
  const auto av = kernels::available();
  REQUIRE(!av.empty());
  CHECK(av.front() == kernels::Isa::scalar);
  CHECK(kernels::table_for(kernels::Isa::scalar) == &kernels::scalar_table());
  bool listed = false;
  for (auto isa : av) listed = listed || isa == kernels::active().isa;
  CHECK(listed);
}

TEST_CASE("every compiled variant matches the scalar reference") {
  std::mt19937_64 rng(42);
  const kernels::Table& ref = kernels::scalar_table();
  for (kernels::Isa isa : kernels::available()) {
    const kernels::Table* t = kernels::table_for(isa);
    REQUIRE(t != nullptr);
    CAPTURE(t->name);
    // Odd lengths exercise the vector remainder paths.
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 17u, 1001u}) {
      CAPTURE(n);
      const Vec a = random_vec(n, rng), b = random_vec(n, rng), c = random_vec(n, rng);
      double scale = 1.0;
      for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i] * (1 + std::abs(c[i])));
      CHECK(std::abs(t->dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= 1e-13 * scale);
      CHECK(std::abs(t->dot3(a.data(), b.data(), c.data(), n) -
                     ref.dot3(a.data(), b.data(), c.data(), n)) <= 1e-13 * scale);

      Vec y1 = c, y2 = c;
      t->axpy(0.37, a.data(), y1.data(), n);
      ref.axpy(0.37, a.data(), y2.data(), n);
      CHECK(max_abs_diff(y1, y2) <= 1e-15 * scale);

      Vec k1 = c, k2 = c;
      Vec decay(n), gain(n);
      for (std::size_t i = 0; i < n; ++i) {
        decay[i] = std::exp(-std::abs(a[i]));
        gain[i] = std::abs(b[i]);
      }
      t->exp_euler(decay.data(), gain.data(), a.data(), k1.data(), n);
      ref.exp_euler(decay.data(), gain.data(), a.data(), k2.data(), n);
      CHECK(max_abs_diff(k1, k2) <= 1e-14 * scale);

      const std::size_t cols = 5, lda = n + 3;
      const Vec A = random_vec(cols * lda, rng), x = random_vec(n, rng), coef = random_vec(cols, rng);
      Vec o1(cols), o2(cols);
      t->gemv_t(A.data(), lda, cols, n, x.data(), o1.data());
      ref.gemv_t(A.data(), lda, cols, n, x.data(), o2.data());
      CHECK(max_abs_diff(o1, o2) <= 1e-12 * (1.0 + n));
      Vec z1(n, 7.0), z2(n, -3.0);
      t->gemv_n(A.data(), lda, cols, n, coef.data(), z1.data());
      ref.gemv_n(A.data(), lda, cols, n, coef.data(), z2.data());
      CHECK(max_abs_diff(z1, z2) <= 1e-12 * (1.0 + cols));
    }
  }
}

TEST_CASE("scalar kernels against direct formulas") {
  const kernels::Table& ref = kernels::scalar_table();
  const Vec a{1, 2, 3}, b{4, 5, 6}, c{-1, 0, 2};
  CHECK(ref.dot(a.data(), b.data(), 3) == 32.0);
  CHECK(ref.dot3(a.data(), b.data(), c.data(), 3) == 32.0);
  const Vec A{1, 0, 0, 1, 1, 1};  // two columns of length 3
  Vec out(2);
  ref.gemv_t(A.data(), 3, 2, 3, a.data(), out.data());
  CHECK(out == Vec{1, 6});
  Vec y(3);
  const Vec coef{2, -1};
  ref.gemv_n(A.data(), 3, 2, 3, coef.data(), y.data());
  CHECK(y == Vec{1, -1, -1});
}

}  // TEST_SUITE
