#pragma once

#include "aviary/simd/kernels.hpp"

namespace aviary::simd::detail {

extern const KernelTable kScalarTable;

// Defined in kernels_avx2.cpp when that translation unit is built; returns
// the table without checking CPU support.
const KernelTable* avx2_table_compiled() noexcept;

}  // namespace aviary::simd::detail
