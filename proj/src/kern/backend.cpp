#include "partrep/kern/backend.hpp"

#include <cstdlib>
#include <cstring>

namespace partrep::kern {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

static Isa pick_isa() {
  if (const char* env = std::getenv("PARTREP_ISA")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
#if defined(PARTREP_HAVE_AVX2_TU)
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Isa::avx2;
#endif
#if defined(PARTREP_HAVE_NEON_TU)
    if (std::strcmp(env, "neon") == 0) return Isa::neon;
#endif
    return Isa::scalar;
  }
#if defined(PARTREP_HAVE_AVX2_TU)
  if (cpu_has_avx2()) return Isa::avx2;
#endif
#if defined(PARTREP_HAVE_NEON_TU)
  return Isa::neon;
#endif
  return Isa::scalar;
}

Isa active_isa() {
  static const Isa isa = pick_isa();
  return isa;
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
    default: return "scalar";
  }
}

}  // namespace partrep::kern
