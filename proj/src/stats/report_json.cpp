#include "aviary/stats/report_json.hpp"

#include <cmath>

namespace aviary::stats {

nlohmann::ordered_json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json to_json(const TestResult& r, const std::vector<std::string>& groups) {
    nlohmann::ordered_json j;
    j["method"] = std::string(method_name(r.method));
    j["statistic"] = finite_or_null(r.statistic);
    if (r.df2) {
        j["df"] = nlohmann::ordered_json::array({r.df1, *r.df2});
    } else {
        j["df"] = r.df1;
    }
    j["p"] = finite_or_null(r.p_value);
    j["effect"] = r.effect ? finite_or_null(*r.effect) : nlohmann::ordered_json(nullptr);
    j["n"] = r.n;
    if (!groups.empty()) {
        j[r.method == Method::PairedT || r.method == Method::Pearson ? "pair" : "groups"] = groups;
    }
    j["notes"] = r.notes;
    return j;
}

nlohmann::ordered_json to_json(const AnovaResult& r, const std::vector<std::string>& groups) {
    nlohmann::ordered_json j;
    j["method"] = "anova_oneway";
    j["statistic"] = finite_or_null(r.f_stat);
    j["df"] = nlohmann::ordered_json::array({r.df_between, r.df_within});
    j["p"] = finite_or_null(r.p_value);
    j["effect"] = finite_or_null(r.eta_squared);
    j["effect_name"] = "eta_squared";
    if (!groups.empty()) j["groups"] = groups;
    j["group_means"] = r.group_means;
    j["group_sizes"] = r.group_sizes;
    j["grand_mean"] = r.grand_mean;
    j["notes"] = nlohmann::ordered_json::array();
    return j;
}

nlohmann::ordered_json to_json(const std::vector<TukeyComparison>& comparisons) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : comparisons) {
        nlohmann::ordered_json j;
        j["group_a"] = c.group_a;
        j["group_b"] = c.group_b;
        j["mean_diff"] = c.mean_diff;
        j["q"] = finite_or_null(c.q_stat);
        j["p_adjusted"] = c.p_adjusted;
        j["significant"] = c.significant;
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace aviary::stats
