#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "aviary/aggregate/aggregate.hpp"
#include "aviary/error.hpp"
#include "aviary/report/report.hpp"

using namespace aviary;
using namespace aviary::report;
using Catch::Matchers::ContainsSubstring;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

aggregate::WeeklyFeatureTable random_table(unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    aggregate::WeeklyFeatureTable t;
    t.columns.assign(aggregate::kFeatureColumns.begin(), aggregate::kFeatureColumns.end());
    for (int w = 5; w <= 20; ++w) {
        t.weeks.push_back(w);
        const double shared = n(rng);
        for (const auto& c : t.columns) {
            // zcr and rel_humidity share a strong component.
            const double v = (c == "zcr" || c == "rel_humidity") ? shared + 0.2 * n(rng) : n(rng);
            t.cells.emplace_back(v);
        }
    }
    return t;
}

std::vector<aggregate::WeeklySummary> summaries_for(const aggregate::WeeklyFeatureTable& t) {
    std::vector<aggregate::WeeklySummary> out;
    for (std::size_t r = 0; r < t.weeks.size(); ++r) {
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            const auto& name = t.columns[c];
            auto modality = aggregate::Modality::Acoustic;
            if (name.rfind("flow_", 0) == 0) modality = aggregate::Modality::Flow;
            if (name.find("temp_mean") != std::string::npos) modality = aggregate::Modality::Thermal;
            if (name == "ambient_temp" || name == "rel_humidity") modality = aggregate::Modality::Env;
            out.push_back({1, t.weeks[r], modality, name, *t.at(r, c), r % 3 == 0 ? std::nullopt : std::optional(0.3), 4});
        }
    }
    return out;
}

// Text of the <g class="panel" data-panel="X"> element.
std::string panel_block(const std::string& svg, const std::string& label) {
    const auto start = svg.find("<g class=\"panel\" data-panel=\"" + label + "\">");
    REQUIRE(start != std::string::npos);
    const auto end = svg.find("</g>\n", start);
    return svg.substr(start, end - start);
}

std::set<std::string> series_in(const std::string& block) {
    std::set<std::string> out;
    const std::regex re("class=\"series\" data-series=\"([^\"]+)\"");
    for (auto it = std::sregex_iterator(block.begin(), block.end(), re); it != std::sregex_iterator(); ++it) {
        out.insert((*it)[1]);
    }
    return out;
}

std::string heatmap_cell(const std::string& svg, const std::string& a, const std::string& b) {
    const auto start = svg.find("<g class=\"cell\" data-a=\"" + a + "\" data-b=\"" + b + "\">");
    REQUIRE(start != std::string::npos);
    return svg.substr(start, svg.find("</g>", start) - start);
}

bool entry_significant_zcr_rh(const aggregate::CorrelationReport& report) {
    for (const auto& e : report.entries) {
        if (e.feature_a == "zcr" && e.feature_b == "rel_humidity") return e.significant;
    }
    return false;
}

}  // namespace

TEST_CASE("trajectory plots carry one x position per week") {
    const auto table = random_table(1);
    const auto panels = aggregate::trajectory_panel(table);
    const auto svg = render_panels_svg(panels_csv(panels), "z");
    CHECK(count(svg, "class=\"xtick\"") == 16);
    const auto summaries = summaries_for(table);
    const auto line = render_trajectory_svg(trajectory_csv(summaries, 1, {"head_temp_mean", "foot_temp_mean"}), "t", "C");
    CHECK(count(line, "class=\"xtick\"") == 16);
    CHECK(count(line, "<circle") == 32);
    const auto bars = render_conditions_svg(conditions_csv(summaries, 1), "flow");
    CHECK(count(bars, "class=\"xtick\"") == 16);
    CHECK(count(bars, "class=\"bar\"") == 48);
}

TEST_CASE("panel A holds exactly head temperature, spectral centroid and baseline flow") {
    const auto svg = render_panels_svg(panels_csv(aggregate::trajectory_panel(random_table(2))), "z");
    CHECK(series_in(panel_block(svg, "A")) == std::set<std::string>{"head_temp_mean", "spectral_centroid", "flow_before"});
    CHECK(series_in(panel_block(svg, "B")) == std::set<std::string>{"foot_temp_mean", "rms"});
    CHECK(series_in(panel_block(svg, "C")) == std::set<std::string>{"head_temp_mean", "spectral_centroid", "flow_before",
                                                                     "foot_temp_mean", "rms", "ambient_temp"});
}

TEST_CASE("heatmap asterisks match the significance column") {
    for (unsigned seed = 1; seed <= 20; ++seed) {
        const auto report = aggregate::correlate_all(random_table(seed));
        const auto svg = render_heatmap_svg(heatmap_csv(report), "r");
        std::size_t significant = 0;
        for (const auto& e : report.entries) {
            const bool star_ab = heatmap_cell(svg, e.feature_a, e.feature_b).find("class=\"sig\"") != std::string::npos;
            const bool star_ba = heatmap_cell(svg, e.feature_b, e.feature_a).find("class=\"sig\"") != std::string::npos;
            CHECK(star_ab == e.significant);
            CHECK(star_ba == e.significant);
            significant += e.significant ? 1 : 0;
        }
        CHECK(count(svg, "class=\"sig\"") == 2 * significant);
        CHECK(entry_significant_zcr_rh(report));
    }
}

TEST_CASE("every plot regenerates exactly from its CSV") {
    const auto table = random_table(3);
    const auto plots = emit_report(summaries_for(table), aggregate::trajectory_panel(table), aggregate::correlate_all(table));
    std::set<std::string> names;
    for (const auto& p : plots) {
        names.insert(p.name);
        CHECK(render_plot(p.name, p.csv) == p.svg);
    }
    CHECK(names.contains("trajectories"));
    CHECK(names.contains("correlation_heatmap"));
    CHECK(names.contains("flow_conditions"));
    CHECK(names.contains("thermal_trajectory"));
    // Env AM/PM series are absent from these summaries.
    CHECK_FALSE(names.contains("env_temperature"));
}

TEST_CASE("missing values break lines and blank sd collapses the band") {
    const std::string csv = "panel,series,week,z\nA,x,5,1\nA,x,6,\nA,x,7,-1\nA,x,8,0.5\n";
    const auto svg = render_panels_svg(csv, "z");
    CHECK(count(svg, "d=\"M") == 1);
    CHECK(svg.find(" M") != std::string::npos);
    const std::string line = "series,week,mean,sd\ns,1,2,\ns,2,3,0.5\n";
    CHECK_NOTHROW(render_trajectory_svg(line, "t", "y"));
}

TEST_CASE("report errors") {
    CHECK_THROWS_WITH(emit_report({}, {}, {}), ContainsSubstring("empty results"));
    CHECK_THROWS_AS(render_plot("pie_chart", "a\n1\n"), ValidationError);
    CHECK_THROWS_AS(render_trajectory_svg("series,week,mean\ns,1,2\n", "t", "y"), ParseError);
    CHECK_THROWS_AS(render_heatmap_svg("feature_a,feature_b,r,significant\na,b,0.5,yes\n", "t"), ParseError);
}
