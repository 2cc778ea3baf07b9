// Compiled with -mavx2 -mfma. Nothing here may run before the dispatcher has
// confirmed CPU support.

#include <immintrin.h>

#include <cmath>

#include "tables.hpp"

namespace aviary::simd::detail {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hsum(__m256 v) {
    // Widen before reducing so the float lanes do not lose more precision.
    const __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(v));
    const __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1));
    return hsum(_mm256_add_pd(lo, hi));
}

double sum_squares(const double* x, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        const __m256d v0 = _mm256_loadu_pd(x + i);
        const __m256d v1 = _mm256_loadu_pd(x + i + 4);
        const __m256d v2 = _mm256_loadu_pd(x + i + 8);
        const __m256d v3 = _mm256_loadu_pd(x + i + 12);
        a0 = _mm256_fmadd_pd(v0, v0, a0);
        a1 = _mm256_fmadd_pd(v1, v1, a1);
        a2 = _mm256_fmadd_pd(v2, v2, a2);
        a3 = _mm256_fmadd_pd(v3, v3, a3);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        a0 = _mm256_fmadd_pd(v, v, a0);
    }
    double acc = hsum(_mm256_add_pd(_mm256_add_pd(a0, a1), _mm256_add_pd(a2, a3)));
    for (; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

std::size_t sign_changes(const double* x, std::size_t n) {
    if (n < 2) return 0;
    const __m256d zero = _mm256_setzero_pd();
    std::size_t count = 0;
    std::size_t i = 1;
    for (; i + 4 <= n; i += 4) {
        const __m256d cur = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_LT_OQ);
        const __m256d prev = _mm256_cmp_pd(_mm256_loadu_pd(x + i - 1), zero, _CMP_LT_OQ);
        const int mask = _mm256_movemask_pd(_mm256_xor_pd(cur, prev));
        count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(mask)));
    }
    for (; i < n; ++i) count += (x[i] < 0.0) != (x[i - 1] < 0.0);
    return count;
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void magnitude(const double* re, const double* im, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_loadu_pd(re + i);
        const __m256d m = _mm256_loadu_pd(im + i);
        _mm256_storeu_pd(out + i, _mm256_sqrt_pd(_mm256_fmadd_pd(r, r, _mm256_mul_pd(m, m))));
    }
    for (; i < n; ++i) out[i] = std::sqrt(re[i] * re[i] + im[i] * im[i]);
}

WeightedSums weighted_sums(const double* w, const double* f, std::size_t n) {
    __m256d sw = _mm256_setzero_pd();
    __m256d swf = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d wv = _mm256_loadu_pd(w + i);
        sw = _mm256_add_pd(sw, wv);
        swf = _mm256_fmadd_pd(wv, _mm256_loadu_pd(f + i), swf);
    }
    WeightedSums s{hsum(sw), hsum(swf)};
    for (; i < n; ++i) {
        s.weight += w[i];
        s.weighted_value += w[i] * f[i];
    }
    return s;
}

double weighted_spread(const double* w, const double* f, double center, std::size_t n) {
    const __m256d c = _mm256_set1_pd(center);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(f + i), c);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), d), d, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        const double d = f[i] - center;
        total += w[i] * d * d;
    }
    return total;
}

void blur_row5(const float* src, float* dst, std::size_t n) {
    if (n < 12) {
        kScalarTable.blur_row5(src, dst, n);
        return;
    }
    const auto at = [&](std::ptrdiff_t i) {
        if (i < 0) i = 0;
        if (i >= static_cast<std::ptrdiff_t>(n)) i = static_cast<std::ptrdiff_t>(n) - 1;
        return src[i];
    };
    const auto edge = [&](std::ptrdiff_t i) {
        dst[i] = (at(i - 2) + 4.0f * at(i - 1) + 6.0f * at(i) + 4.0f * at(i + 1) + at(i + 2)) *
                 (1.0f / 16.0f);
    };
    edge(0);
    edge(1);
    const __m256 four = _mm256_set1_ps(4.0f);
    const __m256 six = _mm256_set1_ps(6.0f);
    const __m256 scale = _mm256_set1_ps(1.0f / 16.0f);
    std::size_t i = 2;
    for (; i + 8 + 2 <= n; i += 8) {
        const __m256 m2 = _mm256_loadu_ps(src + i - 2);
        const __m256 m1 = _mm256_loadu_ps(src + i - 1);
        const __m256 c0 = _mm256_loadu_ps(src + i);
        const __m256 p1 = _mm256_loadu_ps(src + i + 1);
        const __m256 p2 = _mm256_loadu_ps(src + i + 2);
        __m256 acc = _mm256_add_ps(m2, p2);
        acc = _mm256_fmadd_ps(four, _mm256_add_ps(m1, p1), acc);
        acc = _mm256_fmadd_ps(six, c0, acc);
        _mm256_storeu_ps(dst + i, _mm256_mul_ps(acc, scale));
    }
    for (; i < n; ++i) edge(static_cast<std::ptrdiff_t>(i));
}

PatchSums patch_residual(const float* image, std::ptrdiff_t stride, float ax, float ay,
                         const float* tmpl, const float* grad_x, const float* grad_y, int size) {
    const float w00 = (1.0f - ax) * (1.0f - ay);
    const float w10 = ax * (1.0f - ay);
    const float w01 = (1.0f - ax) * ay;
    const float w11 = ax * ay;
    const __m256 v00 = _mm256_set1_ps(w00);
    const __m256 v10 = _mm256_set1_ps(w10);
    const __m256 v01 = _mm256_set1_ps(w01);
    const __m256 v11 = _mm256_set1_ps(w11);
    __m256 agx = _mm256_setzero_ps();
    __m256 agy = _mm256_setzero_ps();
    __m256 ae2 = _mm256_setzero_ps();
    PatchSums tail;
    for (int j = 0; j < size; ++j) {
        const float* r0 = image + j * stride;
        const float* r1 = r0 + stride;
        const int base = j * size;
        int i = 0;
        for (; i + 8 <= size; i += 8) {
            __m256 s = _mm256_mul_ps(v00, _mm256_loadu_ps(r0 + i));
            s = _mm256_fmadd_ps(v10, _mm256_loadu_ps(r0 + i + 1), s);
            s = _mm256_fmadd_ps(v01, _mm256_loadu_ps(r1 + i), s);
            s = _mm256_fmadd_ps(v11, _mm256_loadu_ps(r1 + i + 1), s);
            const __m256 e = _mm256_sub_ps(s, _mm256_loadu_ps(tmpl + base + i));
            agx = _mm256_fmadd_ps(_mm256_loadu_ps(grad_x + base + i), e, agx);
            agy = _mm256_fmadd_ps(_mm256_loadu_ps(grad_y + base + i), e, agy);
            ae2 = _mm256_fmadd_ps(e, e, ae2);
        }
        for (; i < size; ++i) {
            const float sample = w00 * r0[i] + w10 * r0[i + 1] + w01 * r1[i] + w11 * r1[i + 1];
            const float e = sample - tmpl[base + i];
            tail.gx_e += static_cast<double>(grad_x[base + i] * e);
            tail.gy_e += static_cast<double>(grad_y[base + i] * e);
            tail.e2 += static_cast<double>(e * e);
        }
    }
    return PatchSums{hsum(agx) + tail.gx_e, hsum(agy) + tail.gy_e, hsum(ae2) + tail.e2};
}

double magnitude_sum(const float* dx, const float* dy, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_cvtps_pd(_mm_loadu_ps(dx + i));
        const __m256d y = _mm256_cvtps_pd(_mm_loadu_ps(dy + i));
        acc = _mm256_add_pd(acc, _mm256_sqrt_pd(_mm256_fmadd_pd(x, x, _mm256_mul_pd(y, y))));
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        const double x = dx[i];
        const double y = dy[i];
        total += std::sqrt(x * x + y * y);
    }
    return total;
}

const KernelTable kAvx2Table = {
    Isa::Avx2,     sum_squares,     sign_changes, multiply,       magnitude,
    weighted_sums, weighted_spread, blur_row5,    patch_residual, magnitude_sum,
};

}  // namespace

const KernelTable* avx2_table_compiled() noexcept { return &kAvx2Table; }

}  // namespace aviary::simd::detail
