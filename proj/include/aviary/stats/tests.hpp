#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aviary::stats {

using Groups = std::vector<std::vector<double>>;

struct AnovaResult {
    double f_stat = 0.0;
    double df_between = 0.0;
    double df_within = 0.0;
    double p_value = 1.0;
    double eta_squared = 0.0;
    double ss_between = 0.0;
    double ss_within = 0.0;
    double ss_total = 0.0;
    double ms_within = 0.0;
    std::vector<double> group_means;
    std::vector<std::size_t> group_sizes;
    double grand_mean = 0.0;
};

struct TukeyComparison {
    std::string group_a;
    std::string group_b;
    double mean_diff = 0.0;  // mean_a - mean_b
    double q_stat = 0.0;
    double p_adjusted = 1.0;
    bool significant = false;  // p_adjusted < alpha
};

enum class Method { ShapiroWilk, Levene, BrownForsythe, KruskalWallis, PairedT, Pearson };

std::string_view method_name(Method m) noexcept;

struct TestResult {
    Method method = Method::PairedT;
    double statistic = 0.0;
    double df1 = 0.0;
    std::optional<double> df2;  // second degree of freedom where applicable
    double p_value = 1.0;
    std::optional<double> effect;  // Cohen's d_z for PairedT, r for Pearson
    std::size_t n = 0;
    std::vector<std::string> notes;
};

struct FdrEntry {
    std::string label;
    double p_raw = 0.0;
    double q_value = 0.0;
    bool significant = false;
};

struct LabeledP {
    std::string label;
    double p = 0.0;
};

enum class LeveneCenter { Mean, Median };

double mean(std::span<const double> x);
// Sample standard deviation (n - 1 denominator); requires n >= 2.
double sample_sd(std::span<const double> x);
double median(std::span<const double> x);

// Throws ValidationError on fewer than 2 groups, any group with fewer than 2
// values, or zero total variance.
AnovaResult anova_oneway(const Groups& groups);

// Tukey-Kramer pairwise comparisons in (i < j) order. Labels default to
// "1".."k".
std::vector<TukeyComparison> tukey_hsd(const Groups& groups, double alpha = 0.05,
                                       const std::vector<std::string>& labels = {});

TestResult shapiro_wilk(std::span<const double> sample);
TestResult levene(const Groups& groups, LeveneCenter center = LeveneCenter::Mean);
TestResult kruskal_wallis(const Groups& groups);
TestResult paired_t(std::span<const double> x, std::span<const double> y);
TestResult pearson(std::span<const double> x, std::span<const double> y);

// Benjamini-Hochberg step-up; output in input order. Ties broken by index.
std::vector<FdrEntry> bh_fdr(const std::vector<LabeledP>& entries, double q_threshold = 0.05);

std::vector<double> zscore(std::span<const double> series);

// Ranks with ties averaged, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace aviary::stats
