#include <cmath>

#include "tables.hpp"

namespace aviary::simd::detail {
namespace {

double sum_squares(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

std::size_t sign_changes(const double* x, std::size_t n) {
    std::size_t count = 0;
    for (std::size_t i = 1; i < n; ++i) count += (x[i] < 0.0) != (x[i - 1] < 0.0);
    return count;
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void magnitude(const double* re, const double* im, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::sqrt(re[i] * re[i] + im[i] * im[i]);
}

WeightedSums weighted_sums(const double* w, const double* f, std::size_t n) {
    WeightedSums s;
    for (std::size_t i = 0; i < n; ++i) {
        s.weight += w[i];
        s.weighted_value += w[i] * f[i];
    }
    return s;
}

double weighted_spread(const double* w, const double* f, double center, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = f[i] - center;
        acc += w[i] * d * d;
    }
    return acc;
}

void blur_row5(const float* src, float* dst, std::size_t n) {
    if (n == 0) return;
    const auto at = [&](std::ptrdiff_t i) {
        if (i < 0) i = 0;
        if (i >= static_cast<std::ptrdiff_t>(n)) i = static_cast<std::ptrdiff_t>(n) - 1;
        return src[i];
    };
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        dst[i] = (at(i - 2) + 4.0f * at(i - 1) + 6.0f * at(i) + 4.0f * at(i + 1) + at(i + 2)) *
                 (1.0f / 16.0f);
    }
}

PatchSums patch_residual(const float* image, std::ptrdiff_t stride, float ax, float ay,
                         const float* tmpl, const float* grad_x, const float* grad_y, int size) {
    const float w00 = (1.0f - ax) * (1.0f - ay);
    const float w10 = ax * (1.0f - ay);
    const float w01 = (1.0f - ax) * ay;
    const float w11 = ax * ay;
    PatchSums s;
    for (int j = 0; j < size; ++j) {
        const float* r0 = image + j * stride;
        const float* r1 = r0 + stride;
        const int base = j * size;
        for (int i = 0; i < size; ++i) {
            const float sample = w00 * r0[i] + w10 * r0[i + 1] + w01 * r1[i] + w11 * r1[i + 1];
            const float e = sample - tmpl[base + i];
            s.gx_e += static_cast<double>(grad_x[base + i] * e);
            s.gy_e += static_cast<double>(grad_y[base + i] * e);
            s.e2 += static_cast<double>(e * e);
        }
    }
    return s;
}

double magnitude_sum(const float* dx, const float* dy, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = dx[i];
        const double y = dy[i];
        acc += std::sqrt(x * x + y * y);
    }
    return acc;
}

}  // namespace

const KernelTable kScalarTable = {
    Isa::Scalar,  sum_squares, sign_changes,   multiply,      magnitude,
    weighted_sums, weighted_spread, blur_row5, patch_residual, magnitude_sum,
};

}  // namespace aviary::simd::detail
