#pragma once

#include "casimir_mems/simd/kernels.hpp"

namespace casimir_mems::simd::detail {

extern const KernelTable scalar_table;
#if defined(CASIMIR_MEMS_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(CASIMIR_MEMS_HAVE_NEON)
extern const KernelTable neon_table;
#endif

}  // namespace casimir_mems::simd::detail
