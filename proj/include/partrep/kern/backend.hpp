#pragma once

namespace partrep::kern {

enum class Isa { scalar, avx2, neon };

/// ISA picked once at first use: best supported lane, unless
/// PARTREP_ISA=scalar|avx2|neon forces one (used by equivalence tests).
Isa active_isa();

const char* isa_name(Isa isa);

/// True when the running CPU can execute the AVX2+FMA kernels.
bool cpu_has_avx2();

}  // namespace partrep::kern
