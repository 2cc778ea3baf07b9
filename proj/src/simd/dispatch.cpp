#include <cstdlib>
#include <string_view>

#include "tables.hpp"

namespace aviary::simd {

#if !defined(AVIARY_HAVE_AVX2)
namespace detail {
const KernelTable* avx2_table_compiled() noexcept { return nullptr; }
}  // namespace detail
#endif

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

const KernelTable& scalar_kernels() noexcept { return detail::kScalarTable; }

const KernelTable* avx2_kernels() noexcept {
#if defined(AVIARY_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool supported =
        __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? detail::avx2_table_compiled() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active_kernels() noexcept {
    static const KernelTable& table = [] () -> const KernelTable& {
        const char* forced = std::getenv("AVIARY_SENSE_SIMD");
        if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_kernels();
        if (const KernelTable* avx2 = avx2_kernels()) return *avx2;
        return scalar_kernels();
    }();
    return table;
}

double sum_squares(std::span<const double> x) {
    return active_kernels().sum_squares(x.data(), x.size());
}

std::size_t sign_changes(std::span<const double> x) {
    return active_kernels().sign_changes(x.data(), x.size());
}

WeightedSums weighted_sums(std::span<const double> w, std::span<const double> f) {
    return active_kernels().weighted_sums(w.data(), f.data(), w.size());
}

double weighted_spread(std::span<const double> w, std::span<const double> f, double center) {
    return active_kernels().weighted_spread(w.data(), f.data(), center, w.size());
}

double magnitude_sum(std::span<const float> dx, std::span<const float> dy) {
    return active_kernels().magnitude_sum(dx.data(), dy.data(), dx.size());
}

}  // namespace aviary::simd
