#pragma once

// Data-parallel inner loops shared by the acoustic and flow modules.
//
// Every kernel has a scalar reference implementation. On x86-64 an AVX2+FMA
// variant is compiled into a separate translation unit and selected at run
// time when the CPU supports it. The two variants agree to rounding (the
// reductions associate differently), which tests/unit/test_kernels.cpp checks.
// A given variant is deterministic: identical inputs give identical bits.
//
// Set AVIARY_SENSE_SIMD=scalar to force the reference kernels.

#include <cstddef>
#include <span>
#include <string_view>

namespace aviary::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

struct WeightedSums {
    double weight = 0.0;           // sum of w
    double weighted_value = 0.0;   // sum of w * f
};

// Sums over one bilinearly sampled patch against a template:
// e = sample - template, grad_e = sum(g_x * e), sum(g_y * e), and sum(e^2).
struct PatchSums {
    double gx_e = 0.0;
    double gy_e = 0.0;
    double e2 = 0.0;
};

struct KernelTable {
    Isa isa;

    double (*sum_squares)(const double* x, std::size_t n);
    // Number of i in [1, n) where (x[i] < 0) != (x[i-1] < 0). Zero counts as
    // positive.
    std::size_t (*sign_changes)(const double* x, std::size_t n);
    void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
    void (*magnitude)(const double* re, const double* im, double* out, std::size_t n);
    WeightedSums (*weighted_sums)(const double* w, const double* f, std::size_t n);
    // sum(w * (f - center)^2)
    double (*weighted_spread)(const double* w, const double* f, double center, std::size_t n);

    // Five-tap binomial blur [1 4 6 4 1]/16 along one row, edges clamped.
    void (*blur_row5)(const float* src, float* dst, std::size_t n);
    // `image` points at the top-left sample of the (size+1) x (size+1) source
    // block; ax/ay are the shared bilinear fractions in [0, 1).
    PatchSums (*patch_residual)(const float* image, std::ptrdiff_t stride, float ax, float ay,
                                const float* tmpl, const float* grad_x, const float* grad_y,
                                int size);
    // sum(sqrt(dx^2 + dy^2)) accumulated in double.
    double (*magnitude_sum)(const float* dx, const float* dy, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;

// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels() noexcept;

// The table used by the library: AVX2 when available unless overridden by
// AVIARY_SENSE_SIMD=scalar. Resolved once per process.
const KernelTable& active_kernels() noexcept;

// Span conveniences over the active table.
double sum_squares(std::span<const double> x);
std::size_t sign_changes(std::span<const double> x);
WeightedSums weighted_sums(std::span<const double> w, std::span<const double> f);
double weighted_spread(std::span<const double> w, std::span<const double> f, double center);
double magnitude_sum(std::span<const float> dx, std::span<const float> dy);

}  // namespace aviary::simd
