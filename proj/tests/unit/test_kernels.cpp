#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "aviary/simd/kernels.hpp"

using namespace aviary::simd;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<double> random_doubles(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

std::vector<float> random_floats(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    std::vector<float> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

}  // namespace

TEST_CASE("scalar reference kernels on hand-checked inputs") {
    const KernelTable& k = scalar_kernels();
    const std::vector<double> alt{0.5, -0.5, 0.5, -0.5};
    CHECK(k.sum_squares(alt.data(), alt.size()) == 1.0);
    CHECK(k.sign_changes(alt.data(), alt.size()) == 3);
    const std::vector<double> zeros{0.0, 0.0, -1.0, 0.0};
    CHECK(k.sign_changes(zeros.data(), zeros.size()) == 2);

    const std::vector<double> w{1.0, 1.0};
    const std::vector<double> f{500.0, 1500.0};
    const WeightedSums s = k.weighted_sums(w.data(), f.data(), 2);
    CHECK(s.weight == 2.0);
    CHECK(s.weighted_value == 2000.0);
    CHECK(k.weighted_spread(w.data(), f.data(), 1000.0, 2) == 500000.0);

    const std::vector<float> row(10, 3.0f);
    std::vector<float> out(10);
    k.blur_row5(row.data(), out.data(), row.size());
    for (float v : out) CHECK(v == 3.0f);
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
    const KernelTable* avx2 = avx2_kernels();
    if (avx2 == nullptr) SKIP("AVX2 variant unavailable on this build or CPU");
    const KernelTable& ref = scalar_kernels();
    std::mt19937_64 rng(7);

    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 17u, 33u, 257u, 2048u, 4099u}) {
        const auto a = random_doubles(rng, n);
        const auto b = random_doubles(rng, n);
        INFO("n = " << n);
        CHECK_THAT(avx2->sum_squares(a.data(), n), WithinRel(ref.sum_squares(a.data(), n), 1e-12));
        CHECK(avx2->sign_changes(a.data(), n) == ref.sign_changes(a.data(), n));

        std::vector<double> o1(n), o2(n);
        avx2->multiply(a.data(), b.data(), o1.data(), n);
        ref.multiply(a.data(), b.data(), o2.data(), n);
        CHECK(o1 == o2);
        avx2->magnitude(a.data(), b.data(), o1.data(), n);
        ref.magnitude(a.data(), b.data(), o2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK_THAT(o1[i], WithinRel(o2[i], 1e-15));

        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = std::abs(a[i]);
        const auto s1 = avx2->weighted_sums(w.data(), b.data(), n);
        const auto s2 = ref.weighted_sums(w.data(), b.data(), n);
        CHECK_THAT(s1.weight, WithinAbs(s2.weight, 1e-10));
        CHECK_THAT(s1.weighted_value, WithinAbs(s2.weighted_value, 1e-10));
        CHECK_THAT(avx2->weighted_spread(w.data(), b.data(), 0.3, n),
                   WithinAbs(ref.weighted_spread(w.data(), b.data(), 0.3, n), 1e-10));

        const auto fx = random_floats(rng, n);
        const auto fy = random_floats(rng, n);
        CHECK_THAT(avx2->magnitude_sum(fx.data(), fy.data(), n),
                   WithinAbs(ref.magnitude_sum(fx.data(), fy.data(), n), 1e-9));
        std::vector<float> b1(n), b2(n);
        avx2->blur_row5(fx.data(), b1.data(), n);
        ref.blur_row5(fx.data(), b2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK_THAT(b1[i], WithinAbs(b2[i], 1e-6));
    }

    for (int size : {4, 8, 12, 16}) {
        const int stride = size + 5;
        const auto image = random_floats(rng, static_cast<std::size_t>(stride * (size + 2)));
        const auto tmpl = random_floats(rng, static_cast<std::size_t>(size * size));
        const auto gx = random_floats(rng, static_cast<std::size_t>(size * size));
        const auto gy = random_floats(rng, static_cast<std::size_t>(size * size));
        const auto p1 = avx2->patch_residual(image.data(), stride, 0.3f, 0.7f, tmpl.data(), gx.data(),
                                             gy.data(), size);
        const auto p2 = ref.patch_residual(image.data(), stride, 0.3f, 0.7f, tmpl.data(), gx.data(),
                                           gy.data(), size);
        INFO("patch size = " << size);
        CHECK_THAT(p1.gx_e, WithinAbs(p2.gx_e, 1e-4));
        CHECK_THAT(p1.gy_e, WithinAbs(p2.gy_e, 1e-4));
        CHECK_THAT(p1.e2, WithinAbs(p2.e2, 1e-4));
    }
}

TEST_CASE("each kernel variant is deterministic") {
    std::mt19937_64 rng(11);
    const auto a = random_doubles(rng, 1000);
    const KernelTable& k = active_kernels();
    CHECK(k.sum_squares(a.data(), a.size()) == k.sum_squares(a.data(), a.size()));
}
