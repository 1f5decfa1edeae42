#pragma once
#include "alab/kernels.hpp"

namespace alab::kernels::detail {
extern const Table kScalar;
#if defined(ALAB_HAVE_AVX2)
extern const Table kAvx2;
#endif
#if defined(__aarch64__)
extern const Table kNeon;
#endif
}  // namespace alab::kernels::detail
