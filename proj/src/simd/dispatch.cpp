#include <cstdlib>
#include <string>

#include "reenact/simd/kernels.hpp"

namespace reenact::simd {

#if defined(REENACT_BUILD_AVX2)
const Kernels& avx2_kernels_impl();
#endif

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

const Kernels* avx2_kernels() {
#if defined(REENACT_BUILD_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernels_impl() : nullptr;
#else
  return nullptr;
#endif
}

const Kernels& active_kernels() {
  static const Kernels& selected = [] () -> const Kernels& {
    const char* env = std::getenv("REENACT_SIMD");
    if (env != nullptr && std::string(env) == "scalar") return scalar_kernels();
    if (const Kernels* k = avx2_kernels()) return *k;
    return scalar_kernels();
  }();
  return selected;
}

}  // namespace reenact::simd
