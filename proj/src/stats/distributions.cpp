#include "aviary/stats/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "aviary/error.hpp"
#include "quadrature.hpp"

namespace aviary::stats {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 200000;

// Continued fraction for I_x(a, b), valid for x < (a + 1) / (a + b + 2).
double beta_cf(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    return h;
}

double gamma_series(double a, double x) {
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 1; n <= kMaxIter; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw ValidationError(std::string(what) + " must be finite");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete_beta: a and b must be > 0");
    if (std::isnan(x)) throw ValidationError("incomplete_beta: x is NaN");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double gamma_p(double a, double x) {
    if (!(a > 0.0)) throw ValidationError("gamma_p: a must be > 0");
    if (std::isnan(x)) throw ValidationError("gamma_p: x is NaN");
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return gamma_series(a, x);
    return 1.0 - gamma_cf(a, x);
}

double gamma_q(double a, double x) {
    if (!(a > 0.0)) throw ValidationError("gamma_q: a must be > 0");
    if (std::isnan(x)) throw ValidationError("gamma_q: x is NaN");
    if (x <= 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_series(a, x);
    return gamma_cf(a, x);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw ValidationError("normal_quantile: p must lie in [0, 1]");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                     67265.770927008700853) * r + 45921.953931549871457) * r +
                   13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                     39307.89580009271061) * r + 21213.794301586595867) * r +
                   5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                    0.24178072517745061177) * r + 1.27045825245236838258) * r +
                  3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                    0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                  0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                    0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                  0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                    1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                  0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

double t_cdf(double t, double df) {
    if (!(df > 0.0)) throw ValidationError("t_cdf: df must be > 0");
    if (std::isnan(t)) throw ValidationError("t_cdf: t is NaN");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    return t >= 0.0 ? 1.0 - tail : tail;
}

double t_sf_two_sided(double t, double df) {
    if (!(df > 0.0)) throw ValidationError("t_sf_two_sided: df must be > 0");
    if (std::isnan(t)) throw ValidationError("t_sf_two_sided: t is NaN");
    if (std::isinf(t)) return 0.0;
    return std::clamp(incomplete_beta(0.5 * df, 0.5, df / (df + t * t)), 0.0, 1.0);
}

double f_cdf(double f, double df1, double df2) { return 1.0 - f_sf(f, df1, df2); }

double f_sf(double f, double df1, double df2) {
    if (!(df1 > 0.0) || !(df2 > 0.0)) throw ValidationError("f_sf: degrees of freedom must be > 0");
    if (std::isnan(f)) throw ValidationError("f_sf: statistic is NaN");
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return std::clamp(incomplete_beta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f)), 0.0, 1.0);
}

double chi2_cdf(double x, double df) {
    if (!(df > 0.0)) throw ValidationError("chi2_cdf: df must be > 0");
    return gamma_p(0.5 * df, 0.5 * std::max(x, 0.0));
}

double chi2_sf(double x, double df) {
    if (!(df > 0.0)) throw ValidationError("chi2_sf: df must be > 0");
    if (std::isinf(x)) return 0.0;
    return std::clamp(gamma_q(0.5 * df, 0.5 * std::max(x, 0.0)), 0.0, 1.0);
}

namespace {

constexpr int kNodes = 10;
constexpr int kInnerPanels = 24;
constexpr int kOuterPanels = 20;
constexpr double kInnerLimit = 8.0;

const detail::GaussLegendre<kNodes>& gl() {
    static const detail::GaussLegendre<kNodes> rule;
    return rule;
}

// P(range of k iid standard normals <= w)
double range_cdf(double w, int k, const std::vector<double>& z, const std::vector<double>& wphi,
                 const std::vector<double>& cdf_z) {
    if (w <= 0.0) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double inner = cdf_z[i] - normal_cdf(z[i] - w);
        if (inner <= 0.0) continue;
        total += wphi[i] * std::pow(inner, k - 1);
    }
    return std::clamp(k * total, 0.0, 1.0);
}

}  // namespace

double srange_sf(double q, int k, double df) {
    require_finite(q, "srange_sf: q");
    require_finite(df, "srange_sf: df");
    if (q < 0.0) throw ValidationError("srange_sf: q must be >= 0");
    if (k < 2) throw ValidationError("srange_sf: k must be >= 2");
    if (df < 1.0) throw ValidationError("srange_sf: df must be >= 1");
    if (q == 0.0) return 1.0;

    const auto& rule = gl();

    // Inner nodes over z in [-8, 8] with phi(z) * weight and Phi(z) cached.
    std::vector<double> z, wphi, cdf_z;
    z.reserve(kInnerPanels * kNodes);
    const double inner_width = 2.0 * kInnerLimit / kInnerPanels;
    for (int p = 0; p < kInnerPanels; ++p) {
        const double lo = -kInnerLimit + p * inner_width;
        for (int i = 0; i < kNodes; ++i) {
            const double x = lo + 0.5 * inner_width * (rule.nodes[i] + 1.0);
            z.push_back(x);
            wphi.push_back(0.5 * inner_width * rule.weights[i] * std::exp(-0.5 * x * x) /
                           std::sqrt(2.0 * std::numbers::pi));
            cdf_z.push_back(normal_cdf(x));
        }
    }

    // Outer density of S = sqrt(chi2_df / df), truncated at 8 sd and
    // renormalized on the same nodes; log density is taken relative to the mode.
    const double mean_s =
        std::exp(std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df)) * std::sqrt(2.0 / df);
    const double sd_s = std::sqrt(std::max(1.0 - mean_s * mean_s, 0.25 / df));
    const double lo = std::max(0.0, mean_s - 8.0 * sd_s);
    const double hi = mean_s + 8.0 * sd_s;
    const double mode = std::sqrt((df - 1.0) / df);
    const double log_mode = df > 1.0 ? std::log(mode) : 0.0;

    const double outer_width = (hi - lo) / kOuterPanels;
    double mass = 0.0;
    double tail = 0.0;
    for (int p = 0; p < kOuterPanels; ++p) {
        const double a = lo + p * outer_width;
        for (int i = 0; i < kNodes; ++i) {
            const double s = a + 0.5 * outer_width * (rule.nodes[i] + 1.0);
            double log_density = -0.5 * df * (s * s - mode * mode);
            if (df > 1.0) log_density += (df - 1.0) * (std::log(s) - log_mode);
            const double w = 0.5 * outer_width * rule.weights[i] * std::exp(log_density);
            mass += w;
            tail += w * (1.0 - range_cdf(q * s, k, z, wphi, cdf_z));
        }
    }
    return std::clamp(tail / mass, 0.0, 1.0);
}

}  // namespace aviary::stats
