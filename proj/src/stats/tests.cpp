#include "aviary/stats/tests.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "aviary/error.hpp"
#include "aviary/stats/distributions.hpp"

namespace aviary::stats {

namespace {

bool all_equal(std::span<const double> x) {
    return std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end();
}

bool all_equal(const Groups& groups) {
    const double* first = nullptr;
    for (const auto& g : groups) {
        for (const double& v : g) {
            if (first == nullptr) {
                first = &v;
            } else if (v != *first) {
                return false;
            }
        }
    }
    return true;
}

void require_finite(std::span<const double> x, const char* who) {
    for (double v : x) {
        if (!std::isfinite(v)) throw ValidationError(fmt::format("{}: non-finite value", who));
    }
}

// One-way decomposition without degeneracy checks. F is 0 when both sums of
// squares vanish and +inf when only the within term does.
AnovaResult decompose(const Groups& groups) {
    AnovaResult r;
    std::size_t total_n = 0;
    double total_sum = 0.0;
    for (const auto& g : groups) {
        r.group_means.push_back(mean(g));
        r.group_sizes.push_back(g.size());
        total_n += g.size();
        total_sum += std::accumulate(g.begin(), g.end(), 0.0);
    }
    r.grand_mean = total_sum / static_cast<double>(total_n);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const double d = r.group_means[i] - r.grand_mean;
        r.ss_between += static_cast<double>(groups[i].size()) * d * d;
        for (double v : groups[i]) {
            const double e = v - r.group_means[i];
            r.ss_within += e * e;
        }
    }
    r.ss_total = r.ss_between + r.ss_within;
    r.df_between = static_cast<double>(groups.size() - 1);
    r.df_within = static_cast<double>(total_n - groups.size());
    r.ms_within = r.df_within > 0 ? r.ss_within / r.df_within : 0.0;
    if (r.ss_between == 0.0) {
        r.f_stat = 0.0;
        r.p_value = 1.0;
    } else if (r.ss_within == 0.0) {
        r.f_stat = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
    } else {
        r.f_stat = (r.ss_between / r.df_between) / r.ms_within;
        r.p_value = f_sf(r.f_stat, r.df_between, r.df_within);
    }
    r.eta_squared = r.ss_total > 0.0 ? std::clamp(r.ss_between / r.ss_total, 0.0, 1.0) : 0.0;
    return r;
}

void check_groups(const Groups& groups, std::size_t min_size, const char* who) {
    if (groups.size() < 2) throw ValidationError(fmt::format("{}: need at least 2 groups", who));
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].size() < min_size) {
            throw ValidationError(
                fmt::format("{}: group {} has fewer than {} values", who, i + 1, min_size));
        }
        require_finite(groups[i], who);
    }
}

double poly(std::span<const double> c, double x) {
    double r = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
    return r;
}

}  // namespace

std::string_view method_name(Method m) noexcept {
    switch (m) {
        case Method::ShapiroWilk: return "shapiro_wilk";
        case Method::Levene: return "levene";
        case Method::BrownForsythe: return "brown_forsythe";
        case Method::KruskalWallis: return "kruskal_wallis";
        case Method::PairedT: return "paired_t";
        case Method::Pearson: return "pearson";
    }
    return "unknown";
}

double mean(std::span<const double> x) {
    if (x.empty()) throw ValidationError("mean of empty series");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) throw ValidationError("standard deviation needs at least 2 values");
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double median(std::span<const double> x) {
    if (x.empty()) throw ValidationError("median of empty series");
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

AnovaResult anova_oneway(const Groups& groups) {
    check_groups(groups, 2, "anova");
    if (all_equal(groups)) throw ValidationError("anova: zero total variance");
    return decompose(groups);
}

std::vector<TukeyComparison> tukey_hsd(const Groups& groups, double alpha,
                                       const std::vector<std::string>& labels) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("tukey_hsd: alpha must lie in (0, 1)");
    if (!labels.empty() && labels.size() != groups.size()) {
        throw ValidationError("tukey_hsd: label count differs from group count");
    }
    const AnovaResult a = anova_oneway(groups);
    const int k = static_cast<int>(groups.size());
    std::vector<TukeyComparison> out;
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            TukeyComparison c;
            c.group_a = labels.empty() ? std::to_string(i + 1) : labels[i];
            c.group_b = labels.empty() ? std::to_string(j + 1) : labels[j];
            c.mean_diff = a.group_means[i] - a.group_means[j];
            const double se = std::sqrt(a.ms_within / 2.0 *
                                        (1.0 / a.group_sizes[i] + 1.0 / a.group_sizes[j]));
            if (c.mean_diff == 0.0) {
                c.q_stat = 0.0;
                c.p_adjusted = 1.0;
            } else if (se == 0.0) {
                c.q_stat = std::numeric_limits<double>::infinity();
                c.p_adjusted = 0.0;
            } else {
                c.q_stat = std::abs(c.mean_diff) / se;
                c.p_adjusted = srange_sf(c.q_stat, k, a.df_within);
            }
            c.significant = c.p_adjusted < alpha;
            out.push_back(std::move(c));
        }
    }
    return out;
}

TestResult shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3 || n > 5000) throw ValidationError("shapiro_wilk: n must lie in [3, 5000]");
    require_finite(sample, "shapiro_wilk");
    if (all_equal(sample)) throw ValidationError("shapiro_wilk: zero variance");

    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const std::size_t half = n / 2;

    // Royston's approximation to the optimal coefficients, lower half (positive).
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::numbers::sqrt2 / 2.0;
    } else {
        static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
        static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
        const double an25 = static_cast<double>(n) + 0.25;
        std::vector<double> m(half);
        double summ2 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / an25);
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(static_cast<double>(n));
        const double a1 = poly(c1, rsn) - m[0] / ssumm2;
        std::size_t first_scaled;
        double fac;
        if (n > 5) {
            first_scaled = 2;
            const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
        } else {
            first_scaled = 1;
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
        }
        a[0] = a1;
        for (std::size_t i = first_scaled; i < half; ++i) a[i] = -m[i] / fac;
    }

    const double xm = mean(x);
    double ssq = 0.0;
    for (double v : x) ssq += (v - xm) * (v - xm);
    double num = 0.0;
    for (std::size_t i = 0; i < half; ++i) num += a[i] * (x[n - 1 - i] - x[i]);
    const double w = std::min(1.0, num * num / ssq);

    double p;
    if (n == 3) {
        constexpr double pi6 = 6.0 / std::numbers::pi;
        constexpr double stqr = std::numbers::pi / 3.0;
        p = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    } else {
        static constexpr double g[] = {-2.273, 0.459};
        static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
        static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
        static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
        static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
        const double dn = static_cast<double>(n);
        double y = std::log1p(-w);
        double mu, sigma;
        if (n <= 11) {
            const double gamma = poly(g, dn);
            if (y >= gamma) {
                p = 1e-99;
                return TestResult{Method::ShapiroWilk, w, dn, std::nullopt, p, std::nullopt, n, {}};
            }
            y = -std::log(gamma - y);
            mu = poly(c3, dn);
            sigma = std::exp(poly(c4, dn));
        } else {
            const double xx = std::log(dn);
            mu = poly(c5, xx);
            sigma = std::exp(poly(c6, xx));
        }
        p = std::clamp(normal_sf((y - mu) / sigma), 0.0, 1.0);
    }
    return TestResult{Method::ShapiroWilk, w, static_cast<double>(n), std::nullopt, p, std::nullopt, n, {}};
}

TestResult levene(const Groups& groups, LeveneCenter center) {
    check_groups(groups, 2, "levene");
    bool every_group_constant = true;
    for (const auto& g : groups) every_group_constant = every_group_constant && all_equal(g);
    if (every_group_constant) throw ValidationError("levene: all deviations zero");

    Groups z;
    z.reserve(groups.size());
    std::size_t n = 0;
    for (const auto& g : groups) {
        const double c = center == LeveneCenter::Mean ? mean(g) : median(g);
        std::vector<double> dev(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) dev[i] = std::abs(g[i] - c);
        n += g.size();
        z.push_back(std::move(dev));
    }
    const AnovaResult a = decompose(z);
    TestResult r;
    r.method = center == LeveneCenter::Mean ? Method::Levene : Method::BrownForsythe;
    r.statistic = a.f_stat;
    r.df1 = a.df_between;
    r.df2 = a.df_within;
    r.p_value = a.p_value;
    r.n = n;
    r.notes.push_back(center == LeveneCenter::Mean ? "center=mean" : "center=median");
    return r;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = r;
        i = j;
    }
    return ranks;
}

TestResult kruskal_wallis(const Groups& groups) {
    check_groups(groups, 1, "kruskal_wallis");
    std::vector<double> pooled;
    for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
    const std::size_t n = pooled.size();
    if (n < 3) throw ValidationError("kruskal_wallis: need at least 3 values");
    if (all_equal(pooled)) throw ValidationError("kruskal_wallis: all values identical");

    const std::vector<double> ranks = average_ranks(pooled);
    double term = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double rsum = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) rsum += ranks[offset + i];
        term += rsum * rsum / static_cast<double>(g.size());
        offset += g.size();
    }
    const double dn = static_cast<double>(n);
    double h = 12.0 / (dn * (dn + 1.0)) * term - 3.0 * (dn + 1.0);

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double ties = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        ties += t * t * t - t;
        i = j;
    }
    h /= 1.0 - ties / (dn * dn * dn - dn);
    h = std::max(h, 0.0);

    TestResult r;
    r.method = Method::KruskalWallis;
    r.statistic = h;
    r.df1 = static_cast<double>(groups.size() - 1);
    r.p_value = chi2_sf(h, r.df1);
    r.n = n;
    return r;
}

TestResult paired_t(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("paired_t: length mismatch");
    if (x.size() < 2) throw ValidationError("paired_t: need at least 2 pairs");
    require_finite(x, "paired_t");
    require_finite(y, "paired_t");
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
    if (all_equal(d)) throw ValidationError("paired_t: zero variance of differences");
    const double md = mean(d);
    const double sd = sample_sd(d);
    const double n = static_cast<double>(d.size());
    TestResult r;
    r.method = Method::PairedT;
    r.statistic = md / (sd / std::sqrt(n));
    r.df1 = n - 1.0;
    r.p_value = t_sf_two_sided(r.statistic, r.df1);
    r.effect = md / sd;
    r.n = d.size();
    return r;
}

TestResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
    if (x.size() < 3) throw ValidationError("pearson: need at least 3 pairs");
    require_finite(x, "pearson");
    require_finite(y, "pearson");
    if (all_equal(x) || all_equal(y)) throw ValidationError("pearson: zero variance");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double n = static_cast<double>(x.size());
    TestResult out;
    out.method = Method::Pearson;
    out.statistic = r;
    out.df1 = n - 2.0;
    out.p_value = std::abs(r) == 1.0
                      ? 0.0
                      : std::clamp(incomplete_beta(0.5 * (n - 2.0), 0.5, 1.0 - r * r), 0.0, 1.0);
    out.effect = r;
    out.n = x.size();
    return out;
}

std::vector<FdrEntry> bh_fdr(const std::vector<LabeledP>& entries, double q_threshold) {
    if (entries.empty()) throw ValidationError("bh_fdr: no p-values");
    for (const auto& e : entries) {
        if (!(e.p >= 0.0 && e.p <= 1.0)) {
            throw ValidationError(fmt::format("bh_fdr: p-value outside [0, 1] for '{}'", e.label));
        }
    }
    const std::size_t m = entries.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return entries[a].p < entries[b].p; });

    std::vector<double> q_sorted(m);
    double running = 1.0;
    for (std::size_t i = m; i-- > 0;) {
        const double p = entries[order[i]].p;
        const double raw = i + 1 == m ? p : p * static_cast<double>(m) / static_cast<double>(i + 1);
        running = std::min(running, raw);
        // Rounding in p * m / i must not push q below p.
        q_sorted[i] = std::clamp(running, p, 1.0);
    }

    std::vector<FdrEntry> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& e = entries[order[i]];
        out[order[i]] = FdrEntry{e.label, e.p, q_sorted[i], q_sorted[i] <= q_threshold};
    }
    return out;
}

std::vector<double> zscore(std::span<const double> series) {
    if (series.size() < 2) throw ValidationError("zscore: need at least 2 values");
    require_finite(series, "zscore");
    if (all_equal(series)) throw ValidationError("zscore: zero variance");
    const double m = mean(series);
    const double sd = sample_sd(series);
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) out[i] = (series[i] - m) / sd;
    return out;
}

}  // namespace aviary::stats
