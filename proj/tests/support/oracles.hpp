#pragma once

// Independent brute-force references used by the unit and acceptance tests.
// Nothing here calls into the library's distribution code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace aviary::testing {

// Composite 16-point Gauss-Legendre over [a, b] with `panels` panels.
inline double integrate(const std::function<double(double)>& f, double a, double b, int panels = 400) {
    static const auto rule = [] {
        constexpr int n = 16;
        std::vector<double> x(n), w(n);
        for (int i = 0; i < n; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = z;
                for (int j = 2; j <= n; ++j) {
                    const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (z * p1 - p0) / (z * z - 1.0);
                const double dz = p1 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        return std::pair{x, w};
    }();
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        double s = 0.0;
        for (std::size_t i = 0; i < rule.first.size(); ++i) {
            s += rule.second[i] * f(lo + 0.5 * h * (rule.first[i] + 1.0));
        }
        total += 0.5 * h * s;
    }
    return total;
}

inline double oracle_normal_cdf(double z) {
    const double half = integrate([](double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); },
                                  0.0, std::abs(z));
    return z >= 0 ? 0.5 + half : 0.5 - half;
}

inline double oracle_t_cdf(double t, double df) {
    const double c = std::exp(std::lgamma(0.5 * (df + 1)) - std::lgamma(0.5 * df)) / std::sqrt(df * std::numbers::pi);
    const auto pdf = [&](double u) { return c * std::pow(1.0 + u * u / df, -0.5 * (df + 1)); };
    const double half = integrate(pdf, 0.0, std::abs(t), 2000);
    return t >= 0 ? 0.5 + half : 0.5 - half;
}

// CDF via u = sqrt(x), which removes the x^(k/2 - 1) singularity at zero.
inline double oracle_chi2_cdf(double x, double df) {
    const double logc = -(0.5 * df) * std::log(2.0) - std::lgamma(0.5 * df);
    const auto g = [&](double u) {
        if (u <= 0.0) return df == 1.0 ? 2.0 * std::exp(logc) : 0.0;
        const double v = u * u;
        return 2.0 * u * std::exp(logc + (0.5 * df - 1.0) * std::log(v) - 0.5 * v);
    };
    return integrate(g, 0.0, std::sqrt(x), 2000);
}

inline double oracle_f_cdf(double f, double d1, double d2) {
    const double logc = 0.5 * d1 * std::log(d1 / d2) + std::lgamma(0.5 * (d1 + d2)) - std::lgamma(0.5 * d1) -
                        std::lgamma(0.5 * d2);
    const auto g = [&](double u) {
        if (u <= 0.0) return d1 == 1.0 ? 2.0 * std::exp(logc) : 0.0;
        const double v = u * u;
        return 2.0 * u *
               std::exp(logc + (0.5 * d1 - 1.0) * std::log(v) - 0.5 * (d1 + d2) * std::log1p(d1 * v / d2));
    };
    return integrate(g, 0.0, std::sqrt(f), 2000);
}

// Monte Carlo tail of the studentized range: k standard normals against an
// independent sqrt(chi-square(df) / df).
inline double monte_carlo_srange_sf(double q, int k, double df, long draws, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::chi_squared_distribution<double> chi2(df);
    long exceed = 0;
    for (long d = 0; d < draws; ++d) {
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < k; ++i) {
            const double z = normal(rng);
            lo = std::min(lo, z);
            hi = std::max(hi, z);
        }
        const double s = std::sqrt(chi2(rng) / df);
        if (hi - lo > q * s) ++exceed;
    }
    return static_cast<double>(exceed) / static_cast<double>(draws);
}

}  // namespace aviary::testing
