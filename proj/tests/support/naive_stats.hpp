#pragma once

// Textbook-formula reimplementations used as cross-check oracles. They favour
// directness over numerical care: raw power sums, O(N^2) ranking, explicit
// step-up search.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace aviary::testing::naive {

using Groups = std::vector<std::vector<double>>;

struct Anova {
    double f;
    double eta2;
    double df1;
    double df2;
};

// Raw-sum form: SST = sum x^2 - T^2/N, SSB = sum T_i^2/n_i - T^2/N.
inline Anova anova(const Groups& groups) {
    double total = 0.0, sumsq = 0.0, ssb_raw = 0.0;
    std::size_t n = 0;
    for (const auto& g : groups) {
        double t = 0.0;
        for (double v : g) {
            t += v;
            sumsq += v * v;
        }
        total += t;
        ssb_raw += t * t / static_cast<double>(g.size());
        n += g.size();
    }
    const double correction = total * total / static_cast<double>(n);
    const double sst = sumsq - correction;
    const double ssb = ssb_raw - correction;
    const double ssw = sst - ssb;
    const double df1 = static_cast<double>(groups.size() - 1);
    const double df2 = static_cast<double>(n - groups.size());
    return {(ssb / df1) / (ssw / df2), ssb / sst, df1, df2};
}

inline double levene_w(const Groups& groups) {
    Groups z;
    for (const auto& g : groups) {
        double m = 0.0;
        for (double v : g) m += v;
        m /= static_cast<double>(g.size());
        std::vector<double> d;
        for (double v : g) d.push_back(std::fabs(v - m));
        z.push_back(d);
    }
    return anova(z).f;
}

// Rank of v = (# values below) + (1 + # equal) / 2.
inline double kruskal_h(const Groups& groups) {
    std::vector<double> all;
    for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
    const double n = static_cast<double>(all.size());
    auto rank = [&](double v) {
        double below = 0.0, equal = 0.0;
        for (double u : all) {
            below += u < v;
            equal += u == v;
        }
        return below + (1.0 + equal) / 2.0;
    };
    double term = 0.0;
    for (const auto& g : groups) {
        double r = 0.0;
        for (double v : g) r += rank(v);
        term += r * r / static_cast<double>(g.size());
    }
    const double h = 12.0 / (n * (n + 1.0)) * term - 3.0 * (n + 1.0);
    double ties = 0.0;
    std::vector<double> seen;
    for (double v : all) {
        if (std::find(seen.begin(), seen.end(), v) != seen.end()) continue;
        seen.push_back(v);
        const double t = static_cast<double>(std::count(all.begin(), all.end(), v));
        ties += t * t * t - t;
    }
    return h / (1.0 - ties / (n * n * n - n));
}

struct PairedT {
    double t;
    double dz;
};

inline PairedT paired_t(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d;
        s2 += d * d;
    }
    const double m = s / n;
    const double sd = std::sqrt((s2 - n * m * m) / (n - 1.0));
    return {m / (sd / std::sqrt(n)), m / sd};
}

inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// q_i = min over j >= rank(i) of p_(j) * m / j, capped at 1.
inline std::vector<double> bh_q(const std::vector<double>& p) {
    const std::size_t m = p.size();
    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> q(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t rank =
            static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), p[i]) - sorted.begin());
        double best = 1.0;
        for (std::size_t j = rank; j < m; ++j) {
            best = std::min(best, sorted[j] * static_cast<double>(m) / static_cast<double>(j + 1));
        }
        q[i] = best;
    }
    return q;
}

// Significant set of the step-up rule: p_(i) <= i * alpha / m for the largest such i.
inline std::vector<bool> bh_step_up(const std::vector<double>& p, double alpha) {
    const std::size_t m = p.size();
    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    double cutoff = -1.0;
    for (std::size_t i = m; i-- > 0;) {
        if (sorted[i] <= static_cast<double>(i + 1) * alpha / static_cast<double>(m)) {
            cutoff = sorted[i];
            break;
        }
    }
    std::vector<bool> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = p[i] <= cutoff;
    return out;
}

}  // namespace aviary::testing::naive
