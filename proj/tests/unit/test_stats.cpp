#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "aviary/error.hpp"
#include "aviary/stats/distributions.hpp"
#include "aviary/stats/report_json.hpp"
#include "aviary/stats/tests.hpp"
#include "naive_stats.hpp"

using namespace aviary;
using namespace aviary::stats;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using Catch::Matchers::ContainsSubstring;

namespace {

Groups random_groups(std::mt19937_64& rng, int k, int min_n, int max_n, double shift_sd = 0.0) {
    std::uniform_int_distribution<int> size(min_n, max_n);
    std::normal_distribution<double> z(0.0, 1.0);
    Groups g(k);
    for (int i = 0; i < k; ++i) {
        const double shift = shift_sd * z(rng);
        const int n = size(rng);
        for (int j = 0; j < n; ++j) g[i].push_back(10.0 + shift + z(rng));
    }
    return g;
}

std::vector<double> random_vector(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = z(rng);
    return v;
}

}  // namespace

TEST_CASE("anova_oneway worked examples") {
    const auto r = anova_oneway({{1, 2}, {3, 4}, {5, 6}});
    CHECK_THAT(r.f_stat, WithinAbs(16.0, 1e-9));
    CHECK(r.df_between == 2);
    CHECK(r.df_within == 3);
    CHECK_THAT(r.eta_squared, WithinAbs(16.0 / 17.5, 1e-9));
    // df1 = 2 closed form: (1 + 2F/df2)^(-df2/2)
    CHECK_THAT(r.p_value, WithinAbs(std::pow(1.0 + 2.0 * 16.0 / 3.0, -1.5), 1e-6));
    CHECK_THAT(r.p_value, WithinAbs(0.025094573304390855, 1e-9));

    const auto same = anova_oneway({{1, 2, 3}, {1, 2, 3}});
    CHECK(same.f_stat == 0.0);
    CHECK(same.p_value == 1.0);
    CHECK(same.eta_squared == 0.0);

    const auto affine = anova_oneway({{10, 13}, {16, 19}, {22, 25}});
    CHECK_THAT(affine.f_stat, WithinAbs(r.f_stat, 1e-12));
    CHECK_THAT(affine.p_value, WithinAbs(r.p_value, 1e-12));
    CHECK_THAT(affine.eta_squared, WithinAbs(r.eta_squared, 1e-12));

    CHECK_THROWS_AS(anova_oneway({{1, 2}}), ValidationError);
    CHECK_THROWS_AS(anova_oneway({{1, 2}, {3}}), ValidationError);
    CHECK_THROWS_AS(anova_oneway({{2, 2}, {2, 2}}), ValidationError);
}

TEST_CASE("anova_oneway matches the raw-sum oracle on random instances") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 100; ++rep) {
        const auto g = random_groups(rng, 2 + rep % 6, 2, 9, 0.5);
        const auto r = anova_oneway(g);
        const auto o = testing::naive::anova(g);
        CHECK_THAT(r.f_stat, WithinRel(o.f, 1e-9));
        CHECK_THAT(r.eta_squared, WithinAbs(o.eta2, 1e-9));
        CHECK_THAT(r.ss_between + r.ss_within, WithinRel(r.ss_total, 1e-15));
        CHECK(r.p_value >= 0.0);
        CHECK(r.p_value <= 1.0);

        // Common affine transform leaves every output unchanged.
        Groups t = g;
        for (auto& grp : t)
            for (auto& v : grp) v = -2.5 * v + 4.0;
        const auto ra = anova_oneway(t);
        CHECK_THAT(ra.f_stat, WithinRel(r.f_stat, 1e-9));
        CHECK_THAT(ra.eta_squared, WithinAbs(r.eta_squared, 1e-12));
    }
}

TEST_CASE("tukey_hsd worked examples") {
    const auto c = tukey_hsd({{1, 2}, {3, 4}, {5, 6}});
    REQUIRE(c.size() == 3);
    // (1,2), (1,3), (2,3)
    CHECK(c[1].p_adjusted < c[0].p_adjusted);
    CHECK_THAT(c[0].p_adjusted, WithinAbs(c[2].p_adjusted, 1e-12));
    CHECK_THAT(c[0].p_adjusted, WithinAbs(0.12882137047966713, 1e-5));
    CHECK_THAT(c[1].p_adjusted, WithinAbs(0.02218827912027277, 1e-5));
    CHECK(c[0].mean_diff == -2.0);

    const auto unequal = tukey_hsd({{1, 2, 3.5}, {3, 4}, {5, 6, 2, 7}});
    CHECK_THAT(unequal[0].p_adjusted, WithinAbs(0.6877154317396992, 1e-5));
    CHECK_THAT(unequal[1].p_adjusted, WithinAbs(0.15713194054320112, 1e-5));
    CHECK_THAT(unequal[2].p_adjusted, WithinAbs(0.5982306621705581, 1e-5));

    for (const auto& cmp : tukey_hsd({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}})) CHECK(cmp.p_adjusted == 1.0);
}

TEST_CASE("tukey_hsd with two groups reproduces the ANOVA p-value") {
    std::mt19937_64 rng(202);
    for (int rep = 0; rep < 100; ++rep) {
        const auto g = random_groups(rng, 2, 2, 12, 0.7);
        const auto a = anova_oneway(g);
        const auto t = tukey_hsd(g);
        REQUIRE(t.size() == 1);
        CHECK_THAT(t[0].q_stat, WithinRel(std::sqrt(2.0 * a.f_stat), 1e-9));
        CHECK_THAT(t[0].p_adjusted, WithinAbs(a.p_value, 1e-6));
    }
}

TEST_CASE("shapiro_wilk against frozen reference fixtures") {
    std::vector<double> seq(20);
    for (int i = 0; i < 20; ++i) seq[i] = i + 1;
    const auto r = shapiro_wilk(seq);
    CHECK(r.statistic > 0.94);
    CHECK_THAT(r.statistic, WithinAbs(0.9603751832429884, 1e-7));
    CHECK_THAT(r.p_value, WithinAbs(0.5513717457916771, 1e-5));

    struct Fixture {
        std::vector<double> x;
        double w;
        double p;
    };
    const std::vector<Fixture> fixtures{
        {{3.1, 1.2, 5.5}, 0.9955132806891601, 0.8719760792710225},
        {{1, 2, 4, 8}, 0.9202026788806026, 0.5380837777759025},
        {{2.0, 3.5, 1.0, 7.25, 4.0}, 0.9429442826698159, 0.6868224914104766},
        {{0.3, -1.2, 2.2, 0.9, -0.4, 1.7, 3.3, -2.1, 0.05, 1.1, 0.6, -0.8}, 0.9964046260803284,
         0.9999999786671767},
        {{0.345584,  0.821618,  0.330437,  -1.303157, 0.905356,  0.446375,  -0.536953, 0.581118,
          0.364572,  0.294132,  0.028422,  0.546713,  -0.736454, -0.16291,  -0.482119, 0.598846,
          0.039722,  -0.292457, -0.781908, -0.257192, 0.008142,  -0.275603, 1.294064,  1.006724,
          -2.711162, -1.889013, -0.174772, -0.42219,  0.213643,  0.217322,  2.117839,  -1.112021,
          -0.377605, 2.042772,  0.646703,  0.663063,  -0.514006, -1.648075, 0.167465,  0.109014,
          -1.227352, -0.683227, -0.072044, -0.944752, -0.09827,  0.095483,  0.035586,  -0.506292,
          0.593748,  0.891167},
         0.9733757120534846, 0.3157903467194785},
    };
    for (const auto& f : fixtures) {
        INFO("n = " << f.x.size());
        const auto res = shapiro_wilk(f.x);
        CHECK_THAT(res.statistic, WithinAbs(f.w, 1e-6));
        CHECK_THAT(res.p_value, WithinAbs(f.p, 1e-4));
    }

    CHECK_THROWS_WITH(shapiro_wilk(std::vector<double>{1, 1, 1}), ContainsSubstring("zero variance"));
    CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{1, 2}), ValidationError);
}

TEST_CASE("shapiro_wilk is affine invariant") {
    std::mt19937_64 rng(303);
    for (int rep = 0; rep < 50; ++rep) {
        const auto x = random_vector(rng, 3 + rep * 7);
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = 5.0 * x[i] + 2.0;
        CHECK_THAT(shapiro_wilk(y).statistic, WithinAbs(shapiro_wilk(x).statistic, 1e-9));
    }
}

TEST_CASE("levene worked examples") {
    const auto same = levene({{1, 2, 3}, {1, 2, 3}});
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == 1.0);

    const auto r = levene({{1, 2, 3, 4}, {1, 3, 5, 7, 9}});
    CHECK_THAT(r.statistic, WithinAbs(2.4990892531876128, 1e-9));
    CHECK_THAT(r.p_value, WithinAbs(0.15792471098592403, 1e-6));
    CHECK(r.df1 == 1);
    CHECK(r.df2 == 7);

    CHECK_THROWS_WITH(levene({{1, 1}, {2, 2}}), ContainsSubstring("all deviations zero"));

    const auto bf = levene({{1, 2, 3, 4}, {1, 3, 5, 7, 9}}, LeveneCenter::Median);
    CHECK(bf.method == Method::BrownForsythe);
    CHECK_THAT(bf.statistic, WithinAbs(2.4990892531876128, 1e-9));

    std::mt19937_64 rng(404);
    for (int rep = 0; rep < 100; ++rep) {
        const auto g = random_groups(rng, 2 + rep % 5, 2, 10);
        CHECK_THAT(levene(g).statistic, WithinRel(testing::naive::levene_w(g), 1e-8));
    }
}

TEST_CASE("kruskal_wallis worked examples and rank invariance") {
    const auto r = kruskal_wallis({{1, 2}, {3, 4}, {5, 6}});
    CHECK_THAT(r.statistic, WithinAbs(32.0 / 7.0, 1e-9));
    CHECK(r.df1 == 2);
    CHECK_THAT(r.p_value, WithinAbs(std::exp(-r.statistic / 2.0), 1e-12));
    CHECK_THAT(r.p_value, WithinAbs(0.10170139230422694, 1e-9));

    const auto ties = kruskal_wallis({{1, 2, 2, 3}, {3, 4, 4}, {5, 6, 1}});
    CHECK_THAT(ties.statistic, WithinAbs(2.981366459627327, 1e-9));
    CHECK_THAT(ties.p_value, WithinAbs(0.22521872681232527, 1e-9));

    const auto same = kruskal_wallis({{1, 2, 3}, {1, 2, 3}});
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == 1.0);
    CHECK_THROWS_AS(kruskal_wallis({{4, 4}, {4}}), ValidationError);

    std::mt19937_64 rng(505);
    for (int rep = 0; rep < 100; ++rep) {
        auto g = random_groups(rng, 2 + rep % 5, 1, 8, 0.5);
        for (auto& grp : g)
            for (auto& v : grp) v = std::round(v * 2.0) / 2.0;  // force ties
        bool all_same = true;
        for (auto& grp : g)
            for (auto v : grp) all_same = all_same && v == g[0][0];
        if (all_same) continue;
        const auto res = kruskal_wallis(g);
        CHECK_THAT(res.statistic, WithinAbs(testing::naive::kruskal_h(g), 1e-9));
        auto cubed = g;
        for (auto& grp : cubed)
            for (auto& v : grp) v = v * v * v;
        CHECK(kruskal_wallis(cubed).statistic == res.statistic);
    }
}

TEST_CASE("paired_t worked examples") {
    const std::vector<double> x{1, 2, 3}, y{3, 6, 9};
    const auto r = paired_t(x, y);
    CHECK_THAT(r.statistic, WithinAbs(-3.4641016151377544, 1e-9));
    CHECK(r.df1 == 2);
    const double t = r.statistic;
    CHECK_THAT(r.p_value, WithinAbs(2.0 * 0.5 * (1.0 + t / std::sqrt(t * t + 2.0)), 1e-6));
    CHECK_THAT(r.p_value, WithinAbs(0.07417990022744853, 1e-9));
    CHECK_THAT(*r.effect, WithinAbs(-2.0, 1e-9));

    const auto flipped = paired_t(y, x);
    CHECK(flipped.statistic == -r.statistic);
    CHECK(*flipped.effect == -*r.effect);
    CHECK(flipped.p_value == r.p_value);

    CHECK_THROWS_WITH(paired_t(x, x), ContainsSubstring("zero variance of differences"));
    CHECK_THROWS_AS(paired_t(x, std::vector<double>{1, 2}), ValidationError);

    std::mt19937_64 rng(606);
    for (int rep = 0; rep < 100; ++rep) {
        const auto a = random_vector(rng, 2 + rep % 20);
        const auto b = random_vector(rng, 2 + rep % 20);
        const auto o = testing::naive::paired_t(a, b);
        const auto res = paired_t(a, b);
        CHECK_THAT(res.statistic, WithinRel(o.t, 1e-9));
        CHECK_THAT(*res.effect, WithinRel(o.dz, 1e-9));
    }
}

TEST_CASE("pearson worked examples") {
    const auto perfect = pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6});
    CHECK(perfect.statistic == 1.0);
    CHECK(perfect.p_value == 0.0);

    const std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4};
    const auto r = pearson(x, y);
    CHECK_THAT(r.statistic, WithinAbs(0.8, 1e-9));
    CHECK_THAT(r.p_value, WithinAbs(0.2, 1e-6));

    std::vector<double> ax(x.size()), neg(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        ax[i] = 3.0 * x[i] + 1.0;
        neg[i] = -x[i];
    }
    CHECK_THAT(pearson(ax, y).statistic, WithinAbs(r.statistic, 1e-12));
    CHECK_THAT(pearson(neg, y).statistic, WithinAbs(-r.statistic, 1e-12));
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 1, 1}, y), ValidationError);

    std::mt19937_64 rng(707);
    for (int rep = 0; rep < 100; ++rep) {
        const auto a = random_vector(rng, 3 + rep % 30);
        const auto b = random_vector(rng, 3 + rep % 30);
        const auto res = pearson(a, b);
        CHECK_THAT(res.statistic, WithinAbs(testing::naive::pearson_r(a, b), 1e-9));
        const double n = static_cast<double>(a.size());
        const double t = res.statistic * std::sqrt((n - 2.0) / (1.0 - res.statistic * res.statistic));
        CHECK_THAT(res.p_value, WithinAbs(t_sf_two_sided(t, n - 2.0), 1e-12));
    }
}

TEST_CASE("bh_fdr worked examples and step-up equivalence") {
    auto q_of = [](std::vector<double> p) {
        std::vector<LabeledP> in;
        for (std::size_t i = 0; i < p.size(); ++i) in.push_back({std::to_string(i), p[i]});
        std::vector<double> q;
        for (const auto& e : bh_fdr(in)) q.push_back(e.q_value);
        return q;
    };
    for (double q : q_of({0.01, 0.02, 0.03, 0.04})) CHECK_THAT(q, WithinAbs(0.04, 1e-12));
    CHECK_THAT(q_of({0.03})[0], WithinAbs(0.03, 1e-15));
    const auto two = q_of({0.005, 0.1});
    CHECK_THAT(two[0], WithinAbs(0.01, 1e-12));
    CHECK_THAT(two[1], WithinAbs(0.1, 1e-12));
    CHECK_THROWS_AS(q_of({1.2}), ValidationError);

    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int m = 1 + rep % 45;
        std::vector<double> p(m);
        std::vector<LabeledP> in;
        for (int i = 0; i < m; ++i) {
            p[i] = rep % 3 == 0 ? std::pow(u(rng), 4.0) : u(rng);
            if (rep % 7 == 0 && i > 0) p[i] = p[i - 1];  // ties
            in.push_back({std::to_string(i), p[i]});
        }
        const auto out = bh_fdr(in, 0.05);
        const auto q_naive = testing::naive::bh_q(p);
        const auto sig_naive = testing::naive::bh_step_up(p, 0.05);
        for (int i = 0; i < m; ++i) {
            CHECK(out[i].label == std::to_string(i));
            CHECK(out[i].q_value >= out[i].p_raw);
            CHECK(out[i].q_value <= 1.0);
            CHECK_THAT(out[i].q_value, WithinAbs(q_naive[i], 1e-15));
            CHECK(out[i].significant == sig_naive[i]);
        }
    }
}

TEST_CASE("zscore") {
    const auto z = zscore(std::vector<double>{1, 2, 3});
    CHECK(z == std::vector<double>{-1, 0, 1});
    CHECK_THROWS_WITH(zscore(std::vector<double>{2, 2, 2}), ContainsSubstring("zero variance"));

    std::mt19937_64 rng(909);
    for (int rep = 0; rep < 100; ++rep) {
        const auto x = random_vector(rng, 2 + rep % 30);
        const auto zx = zscore(x);
        CHECK_THAT(mean(zx), WithinAbs(0.0, 1e-12));
        CHECK_THAT(sample_sd(zx), WithinAbs(1.0, 1e-12));
        const auto zz = zscore(zx);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK_THAT(zz[i], WithinAbs(zx[i], 1e-12));
    }
}

TEST_CASE("results serialize to JSON") {
    const auto r = paired_t(std::vector<double>{1, 2, 3}, std::vector<double>{3, 6, 9});
    const auto j = to_json(r, {"early", "late"});
    CHECK(j["method"] == "paired_t");
    CHECK(j["pair"][0] == "early");
    CHECK(j["df"] == 2.0);
    const auto a = to_json(anova_oneway({{1, 2}, {3, 4}, {5, 6}}));
    CHECK(a["df"].size() == 2);
}
