#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"

namespace alab::kernels {

const Table& scalar_table() { return detail::kScalar; }

const Table* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &detail::kScalar;
    case Isa::avx2:
#if defined(ALAB_HAVE_AVX2)
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &detail::kAvx2;
#endif
      return nullptr;
    case Isa::neon:
#if defined(__aarch64__)
      return &detail::kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<Isa> available() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
    if (table_for(isa)) out.push_back(isa);
  return out;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

namespace {
const Table& select() {
  if (const char* env = std::getenv("ALAB_SIMD")) {
    const std::string want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
      if (want == isa_name(isa))
        if (const Table* t = table_for(isa)) return *t;
  }
  if (const Table* t = table_for(Isa::avx2)) return *t;
  if (const Table* t = table_for(Isa::neon)) return *t;
  return detail::kScalar;
}
}  // namespace

const Table& active() {
  static const Table& t = select();
  return t;
}

}  // namespace alab::kernels
